#include "monosf/metrics.hpp"

#include <cmath>
#include <sstream>

#include "monosf/error.hpp"

namespace monosf {

namespace {

void require_same_size(int w, int h, const FloatImage& img, const char* what) {
  if (img.width != w || img.height != h)
    throw InvalidArgument(std::string("metrics: size mismatch in ") + what);
}

RateResult aggregate(const std::vector<uint8_t>& errors, const std::vector<uint8_t>& gt_valid,
                     const LabelImage& instances) {
  size_t err_bg = 0, err_fg = 0, n_bg = 0, n_fg = 0;
  for (size_t i = 0; i < errors.size(); ++i) {
    if (!gt_valid[i]) continue;
    bool fg = instances.labels[i] > 0;
    (fg ? n_fg : n_bg) += 1;
    if (errors[i]) (fg ? err_fg : err_bg) += 1;
  }
  RateResult r;
  r.bg = n_bg ? 100.0 * double(err_bg) / double(n_bg) : 0.0;
  r.fg = n_fg ? 100.0 * double(err_fg) / double(n_fg) : 0.0;
  size_t n = n_bg + n_fg;
  r.all = n ? 100.0 * double(err_bg + err_fg) / double(n) : 0.0;
  return r;
}

}  // namespace

std::vector<uint8_t> disparity_error_map(const FloatImage& est_inv_depth,
                                         const FloatImage& gt_inv_depth,
                                         const std::vector<uint8_t>& gt_valid,
                                         const EvalConfig& cfg) {
  if (!cfg.valid()) throw InvalidArgument("metrics: invalid EvalConfig");
  int w = gt_inv_depth.width, h = gt_inv_depth.height;
  require_same_size(w, h, est_inv_depth, "disparity maps");
  if (gt_valid.size() != size_t(w) * h) throw InvalidArgument("metrics: validity mask size");
  std::vector<uint8_t> errors(size_t(w) * h, 0);
  for (size_t i = 0; i < errors.size(); ++i) {
    if (!gt_valid[i]) continue;
    double gt_disp = cfg.baseline_times_fx * double(gt_inv_depth.values[i]);
    double est = double(est_inv_depth.values[i]);
    if (!std::isfinite(est) || est <= 0.0) {
      errors[i] = 1;
      continue;
    }
    double diff = std::abs(cfg.baseline_times_fx * est - gt_disp);
    errors[i] = (diff > cfg.abs_threshold_px && diff > cfg.rel_threshold * std::abs(gt_disp)) ? 1 : 0;
  }
  return errors;
}

std::vector<uint8_t> flow_error_map(const FloatImage& est_u, const FloatImage& est_v,
                                    const FloatImage& gt_u, const FloatImage& gt_v,
                                    const std::vector<uint8_t>& gt_valid,
                                    const EvalConfig& cfg) {
  if (!cfg.valid()) throw InvalidArgument("metrics: invalid EvalConfig");
  int w = gt_u.width, h = gt_u.height;
  require_same_size(w, h, gt_v, "flow maps");
  require_same_size(w, h, est_u, "flow maps");
  require_same_size(w, h, est_v, "flow maps");
  if (gt_valid.size() != size_t(w) * h) throw InvalidArgument("metrics: validity mask size");
  std::vector<uint8_t> errors(size_t(w) * h, 0);
  for (size_t i = 0; i < errors.size(); ++i) {
    if (!gt_valid[i]) continue;
    double eu = double(est_u.values[i]), ev = double(est_v.values[i]);
    if (!std::isfinite(eu) || !std::isfinite(ev)) {
      errors[i] = 1;
      continue;
    }
    double du = eu - double(gt_u.values[i]);
    double dv = ev - double(gt_v.values[i]);
    double epe = std::hypot(du, dv);
    double gt_norm = std::hypot(double(gt_u.values[i]), double(gt_v.values[i]));
    errors[i] = (epe > cfg.abs_threshold_px && epe > cfg.rel_threshold * gt_norm) ? 1 : 0;
  }
  return errors;
}

RateResult disparity_error_rate(const FloatImage& est_inv_depth, const FloatImage& gt_inv_depth,
                                const std::vector<uint8_t>& gt_valid,
                                const LabelImage& instances, const EvalConfig& cfg) {
  return aggregate(disparity_error_map(est_inv_depth, gt_inv_depth, gt_valid, cfg), gt_valid,
                   instances);
}

RateResult flow_error_rate(const FloatImage& est_u, const FloatImage& est_v,
                           const FloatImage& gt_u, const FloatImage& gt_v,
                           const std::vector<uint8_t>& gt_valid, const LabelImage& instances,
                           const EvalConfig& cfg) {
  return aggregate(flow_error_map(est_u, est_v, gt_u, gt_v, gt_valid, cfg), gt_valid, instances);
}

RateResult sceneflow_error_rate(const FloatImage& est_d0, const FloatImage& est_d1,
                                const FloatImage& est_u, const FloatImage& est_v,
                                const FloatImage& gt_d0, const FloatImage& gt_d1,
                                const FloatImage& gt_u, const FloatImage& gt_v,
                                const std::vector<uint8_t>& gt_valid,
                                const LabelImage& instances, const EvalConfig& cfg) {
  std::vector<uint8_t> e1 = disparity_error_map(est_d0, gt_d0, gt_valid, cfg);
  std::vector<uint8_t> e2 = disparity_error_map(est_d1, gt_d1, gt_valid, cfg);
  std::vector<uint8_t> ef = flow_error_map(est_u, est_v, gt_u, gt_v, gt_valid, cfg);
  for (size_t i = 0; i < e1.size(); ++i) e1[i] = e1[i] | e2[i] | ef[i];
  return aggregate(e1, gt_valid, instances);
}

RateResult mean_relative_error(const FloatImage& est_inv_depth, const FloatImage& gt_inv_depth,
                               const std::vector<uint8_t>& gt_valid,
                               const LabelImage& instances, const EvalConfig& cfg) {
  if (!cfg.valid()) throw InvalidArgument("metrics: invalid EvalConfig");
  int w = gt_inv_depth.width, h = gt_inv_depth.height;
  require_same_size(w, h, est_inv_depth, "depth maps");
  double sum_bg = 0, sum_fg = 0;
  size_t n_bg = 0, n_fg = 0;
  for (size_t i = 0; i < size_t(w) * h; ++i) {
    if (!gt_valid[i]) continue;
    double d_gt = double(gt_inv_depth.values[i]);
    if (!(d_gt > 0)) continue;
    double z_gt = 1.0 / d_gt;
    if (z_gt > cfg.mre_depth_cap_m) continue;
    double d_est = double(est_inv_depth.values[i]);
    double rel = 1.0;
    if (std::isfinite(d_est) && d_est > 0) rel = std::abs(1.0 / d_est - z_gt) / z_gt;
    bool fg = instances.labels[i] > 0;
    (fg ? sum_fg : sum_bg) += rel;
    (fg ? n_fg : n_bg) += 1;
  }
  RateResult r;
  r.bg = n_bg ? 100.0 * sum_bg / double(n_bg) : 0.0;
  r.fg = n_fg ? 100.0 * sum_fg / double(n_fg) : 0.0;
  size_t n = n_bg + n_fg;
  r.all = n ? 100.0 * (sum_bg + sum_fg) / double(n) : 0.0;
  return r;
}

std::string MetricsReport::to_csv() const {
  std::ostringstream out;
  out.precision(10);
  out << "metric,bg,fg,all\n";
  auto row = [&](const char* name, const RateResult& r) {
    out << name << "," << r.bg << "," << r.fg << "," << r.all << "\n";
  };
  row("D1", d1);
  row("D2", d2);
  row("Fl", fl);
  row("SF", sf);
  row("MRE", mre);
  return out.str();
}

}  // namespace monosf
