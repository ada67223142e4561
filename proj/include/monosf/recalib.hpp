#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "monosf/depth_map.hpp"
#include "monosf/mixture.hpp"

namespace monosf {

// Global parametric recalibration: affine in log-std space plus a weight
// temperature. Identity is (a=1, b=0, tau_w=1).
struct RecalibMap {
  double a = 1.0;      // log-std gain, > 0
  double b = 0.0;      // log-std offset
  double tau_w = 1.0;  // weight temperature, > 0

  static RecalibMap identity() { return {}; }
  bool is_identity() const { return a == 1.0 && b == 0.0 && tau_w == 1.0; }

  // 3-line key=value text file (a, b, tau_w).
  static RecalibMap load(const std::string& path);
  void save(const std::string& path) const;
};

// Means unchanged; s~ = a*s + b; weights tempered by 1/tau_w and renormalized.
GaussianMixture1D apply_recalibration(const RecalibMap& r, const GaussianMixture1D& m);
DepthDistMap apply_recalibration(const RecalibMap& r, const DepthDistMap& map);

struct FitOptions {
  size_t min_samples = 100;
};

// Minimizes the mean NLL of the recalibrated mixtures at their ground-truth
// depths: coordinate descent over a log-spaced grid, then local refinement.
// The identity map is always in the search space, so the fitted NLL never
// exceeds the identity NLL.
RecalibMap fit_recalibration(const std::vector<CalibSample>& calib_set,
                             const FitOptions& opts = {});

// Mean per-sample NLL, after recalibration when a map is given.
double mean_nll(const std::vector<CalibSample>& calib_set,
                const std::optional<RecalibMap>& recalib = std::nullopt);

// For each level c: empirical fraction of samples whose d_gt lies inside the
// central credible interval [quantile((1-c)/2), quantile((1+c)/2)].
std::vector<std::pair<double, double>> calibration_curve(
    const std::vector<CalibSample>& calib_set, const std::vector<double>& levels,
    const std::optional<RecalibMap>& recalib = std::nullopt);

}  // namespace monosf
