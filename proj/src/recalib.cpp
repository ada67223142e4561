#include "monosf/recalib.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>

#include "monosf/error.hpp"

namespace monosf {

RecalibMap RecalibMap::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open recalibration map: " + path);
  RecalibMap r;
  bool got_a = false, got_b = false, got_t = false;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
    double value = std::stod(line.substr(eq + 1));
    if (key == "a") r.a = value, got_a = true;
    else if (key == "b") r.b = value, got_b = true;
    else if (key == "tau_w") r.tau_w = value, got_t = true;
    else throw IoError("unknown key '" + key + "' in recalibration map " + path);
  }
  if (!got_a || !got_b || !got_t)
    throw IoError("recalibration map missing a/b/tau_w: " + path);
  if (!(r.a > 0) || !(r.tau_w > 0))
    throw IoError("recalibration map requires a > 0 and tau_w > 0: " + path);
  return r;
}

void RecalibMap::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write recalibration map: " + path);
  out.precision(17);
  out << "a=" << a << "\nb=" << b << "\ntau_w=" << tau_w << "\n";
}

GaussianMixture1D apply_recalibration(const RecalibMap& r, const GaussianMixture1D& m) {
  GaussianMixture1D out = m;
  for (double& s : out.log_stds) s = r.a * s + r.b;
  // Temper in log space so tiny weights survive large 1/tau_w exponents.
  double max_log = -std::numeric_limits<double>::infinity();
  std::vector<double> logs(out.weights.size(), -std::numeric_limits<double>::infinity());
  for (size_t i = 0; i < out.weights.size(); ++i) {
    if (out.weights[i] > 0.0) {
      logs[i] = std::log(out.weights[i]) / r.tau_w;
      max_log = std::max(max_log, logs[i]);
    }
  }
  double sum = 0.0;
  for (double l : logs) sum += std::exp(l - max_log);
  for (size_t i = 0; i < out.weights.size(); ++i)
    out.weights[i] = std::exp(logs[i] - max_log) / sum;
  return out;
}

DepthDistMap apply_recalibration(const RecalibMap& r, const DepthDistMap& map) {
  DepthDistMap out(map.width(), map.height(), map.components());
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
      out.set(x, y, apply_recalibration(r, map.mixture(x, y)));
  return out;
}

namespace {

double objective(const std::vector<CalibSample>& set, const RecalibMap& r) {
  double acc = 0.0;
  for (const CalibSample& s : set) acc += mog_nll(apply_recalibration(r, s.mixture), s.d_gt);
  return acc / double(set.size());
}

}  // namespace

RecalibMap fit_recalibration(const std::vector<CalibSample>& calib_set, const FitOptions& opts) {
  if (calib_set.size() < opts.min_samples)
    throw InvalidArgument("fit_recalibration: need at least " +
                          std::to_string(opts.min_samples) + " samples, got " +
                          std::to_string(calib_set.size()));

  // Grids contain the identity values exactly, so the incumbent start is the
  // identity map and only strict improvements are accepted.
  std::vector<double> a_grid, b_grid, tau_grid;
  for (int i = -8; i <= 8; ++i) a_grid.push_back(std::exp(i * std::log(4.0) / 8.0));
  for (int i = -16; i <= 16; ++i) b_grid.push_back(i * (std::log(4.0) / 8.0));
  for (int i = -4; i <= 4; ++i) tau_grid.push_back(std::exp(i * std::log(4.0) / 4.0));

  RecalibMap best = RecalibMap::identity();
  double best_nll = objective(calib_set, best);

  auto try_candidate = [&](RecalibMap cand) {
    if (!(cand.a > 0) || !(cand.tau_w > 0)) return;
    double nll = objective(calib_set, cand);
    if (nll < best_nll) {
      best_nll = nll;
      best = cand;
    }
  };

  for (int round = 0; round < 6; ++round) {
    RecalibMap before = best;
    for (double a : a_grid) try_candidate({a, best.b, best.tau_w});
    for (double b : b_grid) try_candidate({best.a, b, best.tau_w});
    for (double tau : tau_grid) try_candidate({best.a, best.b, tau});
    if (before.a == best.a && before.b == best.b && before.tau_w == best.tau_w) break;
  }

  // Local refinement: shrink per-coordinate steps around the incumbent.
  double step_a = std::log(4.0) / 8.0, step_b = std::log(4.0) / 8.0,
         step_tau = std::log(4.0) / 4.0;
  for (int round = 0; round < 12; ++round) {
    try_candidate({best.a * std::exp(step_a), best.b, best.tau_w});
    try_candidate({best.a * std::exp(-step_a), best.b, best.tau_w});
    try_candidate({best.a, best.b + step_b, best.tau_w});
    try_candidate({best.a, best.b - step_b, best.tau_w});
    try_candidate({best.a, best.b, best.tau_w * std::exp(step_tau)});
    try_candidate({best.a, best.b, best.tau_w * std::exp(-step_tau)});
    step_a *= 0.5;
    step_b *= 0.5;
    step_tau *= 0.5;
  }
  return best;
}

double mean_nll(const std::vector<CalibSample>& calib_set,
                const std::optional<RecalibMap>& recalib) {
  if (calib_set.empty()) throw InvalidArgument("mean_nll: empty calibration set");
  double acc = 0.0;
  for (const CalibSample& s : calib_set)
    acc += recalib ? mog_nll(apply_recalibration(*recalib, s.mixture), s.d_gt)
                   : mog_nll(s.mixture, s.d_gt);
  return acc / double(calib_set.size());
}

std::vector<std::pair<double, double>> calibration_curve(
    const std::vector<CalibSample>& calib_set, const std::vector<double>& levels,
    const std::optional<RecalibMap>& recalib) {
  for (double c : levels)
    if (!(c > 0.0 && c < 1.0)) throw InvalidArgument("calibration_curve: level outside (0,1)");
  std::vector<std::pair<double, double>> curve;
  curve.reserve(levels.size());
  for (double c : levels) {
    size_t hits = 0;
    for (const CalibSample& s : calib_set) {
      GaussianMixture1D m = recalib ? apply_recalibration(*recalib, s.mixture) : s.mixture;
      double lo = mog_quantile(m, 0.5 * (1.0 - c));
      double hi = mog_quantile(m, 0.5 * (1.0 + c));
      if (s.d_gt >= lo && s.d_gt <= hi) ++hits;
    }
    curve.emplace_back(c, calib_set.empty() ? 0.0 : double(hits) / double(calib_set.size()));
  }
  return curve;
}

}  // namespace monosf
