#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace monosf {

// 8-bit grayscale image, row-major.
struct GrayImage {
  int width = 0, height = 0;
  std::vector<uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, uint8_t fill = 0)
      : width(w), height(h), pixels(size_t(w) * h, fill) {}

  uint8_t at(int x, int y) const { return pixels[size_t(y) * width + x]; }
  uint8_t& at(int x, int y) { return pixels[size_t(y) * width + x]; }
  // Edge-clamped read.
  uint8_t at_clamped(int x, int y) const;
  bool in_bounds(double u, double v) const {
    return u >= 0 && v >= 0 && u <= width - 1 && v <= height - 1;
  }
};

// 16-bit label image (instance masks: 0 = background, k > 0 = instance k).
struct LabelImage {
  int width = 0, height = 0;
  std::vector<uint16_t> labels;

  LabelImage() = default;
  LabelImage(int w, int h, uint16_t fill = 0)
      : width(w), height(h), labels(size_t(w) * h, fill) {}

  uint16_t at(int x, int y) const { return labels[size_t(y) * width + x]; }
  uint16_t& at(int x, int y) { return labels[size_t(y) * width + x]; }
  uint16_t max_label() const;
};

// Single-channel float map with a bottom-up "Pf" PFM on disk.
struct FloatImage {
  int width = 0, height = 0;
  std::vector<float> values;

  FloatImage() = default;
  FloatImage(int w, int h, float fill = 0.f)
      : width(w), height(h), values(size_t(w) * h, fill) {}

  float at(int x, int y) const { return values[size_t(y) * width + x]; }
  float& at(int x, int y) { return values[size_t(y) * width + x]; }
};

// Binary PGM (P5). 8-bit for images, 16-bit (maxval 65535) for label masks.
// All multi-byte fields in this artifact's formats are little-endian.
GrayImage load_pgm8(const std::string& path);
void save_pgm8(const std::string& path, const GrayImage& img);
LabelImage load_pgm16(const std::string& path);
void save_pgm16(const std::string& path, const LabelImage& img);

// PFM "Pf": little-endian f32, rows stored bottom-up.
FloatImage load_pfm(const std::string& path);
void save_pfm(const std::string& path, const FloatImage& img);

}  // namespace monosf
