#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "monosf/image.hpp"

namespace monosf {

struct EvalConfig {
  // Converts inverse depth to a synthetic stereo disparity:
  // disparity = baseline_times_fx * d (pixel * meters * 1/m = pixels).
  double baseline_times_fx = 0;
  double abs_threshold_px = 3.0;
  double rel_threshold = 0.05;
  double mre_depth_cap_m = 50.0;

  bool valid() const {
    return baseline_times_fx > 0 && abs_threshold_px >= 0 && rel_threshold >= 0 &&
           mre_depth_cap_m > 0;
  }
};

// Percentages over background (instance label 0), foreground, and all pixels.
struct RateResult {
  double bg = 0, fg = 0, all = 0;
};

// Per-pixel error flags (1 = error); entries outside the validity mask are 0.
// A pixel errs when it exceeds BOTH the absolute and the relative threshold,
// or when the estimate is non-finite / non-positive where positivity applies.
std::vector<uint8_t> disparity_error_map(const FloatImage& est_inv_depth,
                                         const FloatImage& gt_inv_depth,
                                         const std::vector<uint8_t>& gt_valid,
                                         const EvalConfig& cfg);
std::vector<uint8_t> flow_error_map(const FloatImage& est_u, const FloatImage& est_v,
                                    const FloatImage& gt_u, const FloatImage& gt_v,
                                    const std::vector<uint8_t>& gt_valid,
                                    const EvalConfig& cfg);

RateResult disparity_error_rate(const FloatImage& est_inv_depth, const FloatImage& gt_inv_depth,
                                const std::vector<uint8_t>& gt_valid,
                                const LabelImage& instances, const EvalConfig& cfg);

RateResult flow_error_rate(const FloatImage& est_u, const FloatImage& est_v,
                           const FloatImage& gt_u, const FloatImage& gt_v,
                           const std::vector<uint8_t>& gt_valid, const LabelImage& instances,
                           const EvalConfig& cfg);

// A pixel is a scene-flow error iff it errs in any of D1, D2, or Fl.
RateResult sceneflow_error_rate(const FloatImage& est_d0, const FloatImage& est_d1,
                                const FloatImage& est_u, const FloatImage& est_v,
                                const FloatImage& gt_d0, const FloatImage& gt_d1,
                                const FloatImage& gt_u, const FloatImage& gt_v,
                                const std::vector<uint8_t>& gt_valid,
                                const LabelImage& instances, const EvalConfig& cfg);

// Mean relative depth error at t=0 over valid pixels with GT depth within the
// cap, in percent. Non-positive or non-finite estimates count as 100%.
RateResult mean_relative_error(const FloatImage& est_inv_depth, const FloatImage& gt_inv_depth,
                               const std::vector<uint8_t>& gt_valid,
                               const LabelImage& instances, const EvalConfig& cfg);

// CSV report with header "metric,bg,fg,all" and one row per metric.
struct MetricsReport {
  RateResult d1, d2, fl, sf, mre;
  std::string to_csv() const;
};

}  // namespace monosf
