#include "monosf/depth_map.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "monosf/error.hpp"

namespace monosf {

namespace {

void write_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

void write_f32(std::ostream& out, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  write_u32(out, bits);
}

float read_f32(std::istream& in) {
  uint32_t bits = read_u32(in);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

}  // namespace

DepthDistMap::DepthDistMap(int width, int height, int components)
    : width_(width), height_(height), components_(components) {
  if (width <= 0 || height <= 0 || components < 1)
    throw InvalidArgument("DepthDistMap: bad dimensions");
  size_t n = size_t(width) * height * components;
  weights_.assign(n, 0.0);
  means_.assign(n, 0.0);
  log_stds_.assign(n, 0.0);
}

void DepthDistMap::set(int x, int y, const GaussianMixture1D& m) {
  if (m.count() != components_)
    throw InvalidArgument("DepthDistMap::set: component count mismatch");
  size_t off = (size_t(y) * width_ + x) * components_;
  for (int i = 0; i < components_; ++i) {
    weights_[off + i] = m.weights[i];
    means_[off + i] = m.means[i];
    log_stds_[off + i] = m.log_stds[i];
  }
}

GaussianMixture1D DepthDistMap::mixture(int x, int y) const {
  size_t off = (size_t(y) * width_ + x) * components_;
  return GaussianMixture1D(
      std::vector<double>(weights_.begin() + off, weights_.begin() + off + components_),
      std::vector<double>(means_.begin() + off, means_.begin() + off + components_),
      std::vector<double>(log_stds_.begin() + off, log_stds_.begin() + off + components_));
}

std::vector<double> DepthDistMap::nll_caps(double coverage) const {
  std::vector<double> caps(size_t(width_) * height_);
  for (int y = 0; y < height_; ++y)
    for (int x = 0; x < width_; ++x) caps[size_t(y) * width_ + x] = mog_nll_cap(at(x, y), coverage);
  return caps;
}

DepthDistMap DepthDistMap::load(const std::string& path, double weight_tol) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open MOGD file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "MOGD", 4) != 0)
    throw IoError("not a MOGD file: " + path);
  uint32_t version = read_u32(in);
  uint32_t width = read_u32(in), height = read_u32(in), k = read_u32(in);
  if (version != 1) throw IoError("unsupported MOGD version in " + path);
  if (!in || width == 0 || height == 0 || k == 0 || width > 1u << 16 || height > 1u << 16 ||
      k > 1024)
    throw IoError("bad MOGD header in " + path);
  DepthDistMap map{int(width), int(height), int(k)};
  size_t n = size_t(width) * height * k;
  std::vector<float> raw(n * 3);
  in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size() * 4));
  if (!in) throw IoError("truncated MOGD file: " + path);
#if defined(__BYTE_ORDER__) && __BYTE_ORDER__ != __ORDER_LITTLE_ENDIAN__
#error MOGD loader assumes a little-endian host
#endif
  for (size_t p = 0; p < size_t(width) * height; ++p) {
    double sum = 0.0;
    size_t off = p * k;
    for (uint32_t i = 0; i < k; ++i) {
      const float* t = raw.data() + (off + i) * 3;
      map.weights_[off + i] = t[0];
      map.means_[off + i] = t[1];
      map.log_stds_[off + i] = t[2];
      sum += t[0];
    }
    if (std::abs(sum - 1.0) > weight_tol)
      throw IoError("MOGD pixel weights deviate from 1 beyond tolerance in " + path);
    for (uint32_t i = 0; i < k; ++i) map.weights_[off + i] /= sum;
  }
  return map;
}

void DepthDistMap::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write MOGD file: " + path);
  out.write("MOGD", 4);
  write_u32(out, 1);
  write_u32(out, uint32_t(width_));
  write_u32(out, uint32_t(height_));
  write_u32(out, uint32_t(components_));
  size_t n = size_t(width_) * height_ * components_;
  for (size_t i = 0; i < n; ++i) {
    write_f32(out, float(weights_[i]));
    write_f32(out, float(means_[i]));
    write_f32(out, float(log_stds_[i]));
  }
  if (!out) throw IoError("failed writing MOGD file: " + path);
}

std::vector<CalibSample> load_calib_samples(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open MOGC file: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "MOGC", 4) != 0)
    throw IoError("not a MOGC file: " + path);
  uint32_t version = read_u32(in);
  uint32_t n = read_u32(in), k = read_u32(in);
  if (version != 1) throw IoError("unsupported MOGC version in " + path);
  if (!in || k == 0 || k > 1024) throw IoError("bad MOGC header in " + path);
  std::vector<CalibSample> samples;
  samples.reserve(n);
  for (uint32_t r = 0; r < n; ++r) {
    std::vector<double> w(k), mu(k), s(k);
    for (uint32_t i = 0; i < k; ++i) {
      w[i] = read_f32(in);
      mu[i] = read_f32(in);
      s[i] = read_f32(in);
    }
    double d_gt = read_f32(in);
    if (!in) throw IoError("truncated MOGC file: " + path);
    samples.push_back({GaussianMixture1D(std::move(w), std::move(mu), std::move(s)), d_gt});
  }
  return samples;
}

void save_calib_samples(const std::string& path, const std::vector<CalibSample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write MOGC file: " + path);
  uint32_t k = samples.empty() ? 1 : uint32_t(samples.front().mixture.count());
  out.write("MOGC", 4);
  write_u32(out, 1);
  write_u32(out, uint32_t(samples.size()));
  write_u32(out, k);
  for (const CalibSample& s : samples) {
    if (uint32_t(s.mixture.count()) != k)
      throw InvalidArgument("save_calib_samples: inconsistent component counts");
    for (uint32_t i = 0; i < k; ++i) {
      write_f32(out, float(s.mixture.weights[i]));
      write_f32(out, float(s.mixture.means[i]));
      write_f32(out, float(s.mixture.log_stds[i]));
    }
    write_f32(out, float(s.d_gt));
  }
  if (!out) throw IoError("failed writing MOGC file: " + path);
}

}  // namespace monosf
