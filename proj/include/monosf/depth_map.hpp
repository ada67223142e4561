#pragma once

#include <string>
#include <vector>

#include "monosf/mixture.hpp"

namespace monosf {

// Per-pixel mixture-of-Gaussians distributions over inverse depth, with a
// component count shared by every pixel. Immutable after load; concurrent
// reads are safe.
class DepthDistMap {
 public:
  DepthDistMap() = default;
  DepthDistMap(int width, int height, int components);

  int width() const { return width_; }
  int height() const { return height_; }
  int components() const { return components_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  MixtureView at(int x, int y) const {
    size_t off = (size_t(y) * width_ + x) * components_;
    return {weights_.data() + off, means_.data() + off, log_stds_.data() + off, components_};
  }

  void set(int x, int y, const GaussianMixture1D& m);
  GaussianMixture1D mixture(int x, int y) const;

  // Per-pixel finite penalty used when an energy term meets an invalid depth:
  // the NLL on the boundary of the central `coverage` credible interval.
  std::vector<double> nll_caps(double coverage = 0.999) const;

  // "MOGD" binary: magic, LE u32 {version=1, width, height, K}, then per
  // pixel (row-major) K triples of LE f32 (lambda, mu, s). Loading rejects
  // pixels whose weight sum is off by more than `weight_tol` and renormalizes
  // smaller deviations.
  static DepthDistMap load(const std::string& path, double weight_tol = 1e-3);
  void save(const std::string& path) const;

 private:
  int width_ = 0, height_ = 0, components_ = 0;
  std::vector<double> weights_, means_, log_stds_;
};

// One recalibration observation: a predicted mixture and the true inverse depth.
struct CalibSample {
  GaussianMixture1D mixture;
  double d_gt = 0;  // > 0
};

// "MOGC" binary: magic, LE u32 {version=1, N, K}, then N records of K f32
// triples followed by f32 d_gt.
std::vector<CalibSample> load_calib_samples(const std::string& path);
void save_calib_samples(const std::string& path, const std::vector<CalibSample>& samples);

}  // namespace monosf
