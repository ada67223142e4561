#include "monosf/image.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>

#include "monosf/error.hpp"

namespace monosf {

uint8_t GrayImage::at_clamped(int x, int y) const {
  x = std::clamp(x, 0, width - 1);
  y = std::clamp(y, 0, height - 1);
  return pixels[size_t(y) * width + x];
}

uint16_t LabelImage::max_label() const {
  uint16_t m = 0;
  for (uint16_t l : labels) m = std::max(m, l);
  return m;
}

namespace {

// Reads one whitespace-delimited token, skipping '#' comment lines.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (!std::isspace(c)) {
      tok.push_back(char(c));
      break;
    }
  }
  while ((c = in.get()) != EOF && !std::isspace(c)) tok.push_back(char(c));
  return tok;
}

struct PnmHeader {
  int width = 0, height = 0, maxval = 0;
};

PnmHeader read_p5_header(std::istream& in, const std::string& path) {
  if (next_token(in) != "P5") throw IoError("not a binary PGM (P5): " + path);
  PnmHeader h;
  try {
    h.width = std::stoi(next_token(in));
    h.height = std::stoi(next_token(in));
    h.maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw IoError("malformed PGM header: " + path);
  }
  if (h.width <= 0 || h.height <= 0) throw IoError("bad PGM dimensions: " + path);
  return h;
}

}  // namespace

GrayImage load_pgm8(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path);
  PnmHeader h = read_p5_header(in, path);
  if (h.maxval != 255) throw IoError("expected 8-bit PGM (maxval 255): " + path);
  GrayImage img(h.width, h.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
  if (!in) throw IoError("truncated PGM: " + path);
  return img;
}

void save_pgm8(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image: " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.pixels.data()), std::streamsize(img.pixels.size()));
  if (!out) throw IoError("failed writing PGM: " + path);
}

LabelImage load_pgm16(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mask: " + path);
  PnmHeader h = read_p5_header(in, path);
  if (h.maxval != 65535) throw IoError("expected 16-bit PGM (maxval 65535): " + path);
  LabelImage img(h.width, h.height);
  std::vector<unsigned char> raw(img.labels.size() * 2);
  in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
  if (!in) throw IoError("truncated PGM: " + path);
  for (size_t i = 0; i < img.labels.size(); ++i)
    img.labels[i] = uint16_t(raw[2 * i]) | uint16_t(raw[2 * i + 1]) << 8;
  return img;
}

void save_pgm16(const std::string& path, const LabelImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write mask: " + path);
  out << "P5\n" << img.width << " " << img.height << "\n65535\n";
  std::vector<unsigned char> raw(img.labels.size() * 2);
  for (size_t i = 0; i < img.labels.size(); ++i) {
    raw[2 * i] = static_cast<unsigned char>(img.labels[i] & 0xff);
    raw[2 * i + 1] = static_cast<unsigned char>(img.labels[i] >> 8);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), std::streamsize(raw.size()));
  if (!out) throw IoError("failed writing PGM: " + path);
}

FloatImage load_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PFM: " + path);
  if (next_token(in) != "Pf") throw IoError("not a grayscale PFM (Pf): " + path);
  FloatImage img;
  double scale = 0;
  try {
    img.width = std::stoi(next_token(in));
    img.height = std::stoi(next_token(in));
    scale = std::stod(next_token(in));
  } catch (const std::exception&) {
    throw IoError("malformed PFM header: " + path);
  }
  if (img.width <= 0 || img.height <= 0) throw IoError("bad PFM dimensions: " + path);
  if (scale >= 0) throw IoError("big-endian PFM not supported: " + path);
  img.values.resize(size_t(img.width) * img.height);
  // Rows are stored bottom-up.
  for (int y = img.height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(img.values.data() + size_t(y) * img.width),
            std::streamsize(img.width * 4));
  }
  if (!in) throw IoError("truncated PFM: " + path);
  return img;
}

void save_pfm(const std::string& path, const FloatImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write PFM: " + path);
  out << "Pf\n" << img.width << " " << img.height << "\n-1.0\n";
  for (int y = img.height - 1; y >= 0; --y) {
    out.write(reinterpret_cast<const char*>(img.values.data() + size_t(y) * img.width),
              std::streamsize(img.width * 4));
  }
  if (!out) throw IoError("failed writing PFM: " + path);
}

}  // namespace monosf
