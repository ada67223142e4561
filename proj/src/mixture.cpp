#include "monosf/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "monosf/error.hpp"

namespace monosf {

namespace {
constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
constexpr double kSqrt2 = 1.4142135623730950488016887242097;
constexpr double kSqrt2Pi = 2.5066282746310005024157652848110;
}  // namespace

GaussianMixture1D::GaussianMixture1D(std::vector<double> w, std::vector<double> mu,
                                     std::vector<double> s)
    : weights(std::move(w)), means(std::move(mu)), log_stds(std::move(s)) {
  if (weights.size() != means.size() || weights.size() != log_stds.size() || weights.empty())
    throw InvalidArgument("GaussianMixture1D: component arrays must be non-empty and equal-sized");
}

GaussianMixture1D GaussianMixture1D::single(double mean, double sigma) {
  if (!(sigma > 0)) throw InvalidArgument("GaussianMixture1D::single: sigma must be positive");
  return GaussianMixture1D({1.0}, {mean}, {std::log(sigma)});
}

bool GaussianMixture1D::valid(double weight_tol) const {
  if (weights.empty()) return false;
  double sum = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] >= 0.0) || !std::isfinite(means[i]) || !std::isfinite(log_stds[i]))
      return false;
    sum += weights[i];
  }
  return std::abs(sum - 1.0) <= weight_tol;
}

void GaussianMixture1D::normalize_weights() {
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (sum <= 0.0) throw InvalidArgument("normalize_weights: weights sum to zero");
  for (double& w : weights) w /= sum;
}

double mog_pdf(const MixtureView& m, double d) {
  double acc = 0.0;
  for (int i = 0; i < m.count; ++i) {
    double sigma = std::exp(m.log_std[i]);
    double z = (d - m.mean[i]) / sigma;
    acc += m.weight[i] * std::exp(-0.5 * z * z) / (sigma * kSqrt2Pi);
  }
  return acc;
}

double mog_nll(const MixtureView& m, double d) {
  // log-sum-exp with the max-component trick; per-component log density is
  // log l_i - 0.5 z^2 - s_i - log sqrt(2 pi).
  double max_term = -std::numeric_limits<double>::infinity();
  double terms[64];
  double* t = m.count <= 64 ? terms : new double[m.count];
  for (int i = 0; i < m.count; ++i) {
    if (m.weight[i] <= 0.0) {
      t[i] = -std::numeric_limits<double>::infinity();
      continue;
    }
    double z = (d - m.mean[i]) * std::exp(-m.log_std[i]);
    t[i] = std::log(m.weight[i]) - 0.5 * z * z - m.log_std[i] - kLogSqrt2Pi;
    max_term = std::max(max_term, t[i]);
  }
  double acc = 0.0;
  for (int i = 0; i < m.count; ++i) acc += std::exp(t[i] - max_term);
  if (t != terms) delete[] t;
  return -(max_term + std::log(acc));
}

double mog_cdf(const MixtureView& m, double d) {
  double acc = 0.0;
  for (int i = 0; i < m.count; ++i) {
    double z = (d - m.mean[i]) * std::exp(-m.log_std[i]);
    acc += m.weight[i] * 0.5 * (1.0 + std::erf(z / kSqrt2));
  }
  return acc;
}

double mog_quantile(const MixtureView& m, double q) {
  if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("mog_quantile: q must be in (0,1)");
  double lo = m.mean[0], hi = m.mean[0];
  double max_sigma = 0.0;
  for (int i = 0; i < m.count; ++i) {
    double sigma = std::exp(m.log_std[i]);
    lo = std::min(lo, m.mean[i]);
    hi = std::max(hi, m.mean[i]);
    max_sigma = std::max(max_sigma, sigma);
  }
  double pad = 12.0 * max_sigma;
  lo -= pad;
  hi += pad;
  while (mog_cdf(m, lo) > q) lo -= pad, pad *= 2.0;
  while (mog_cdf(m, hi) < q) hi += pad, pad *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    double c = mog_cdf(m, mid);
    if (std::abs(c - q) <= 1e-12) return mid;
    (c < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double mog_mean(const MixtureView& m) {
  double acc = 0.0;
  for (int i = 0; i < m.count; ++i) acc += m.weight[i] * m.mean[i];
  return acc;
}

double mog_variance(const MixtureView& m) {
  double mu = mog_mean(m);
  double acc = 0.0;
  for (int i = 0; i < m.count; ++i) {
    double sigma = std::exp(m.log_std[i]);
    acc += m.weight[i] * (sigma * sigma + m.mean[i] * m.mean[i]);
  }
  return acc - mu * mu;
}

double mog_nll_cap(const MixtureView& m, double coverage) {
  double ql = mog_quantile(m, 0.5 * (1.0 - coverage));
  double qh = mog_quantile(m, 0.5 * (1.0 + coverage));
  return std::max(mog_nll(m, ql), mog_nll(m, qh));
}

double mog_nll_derivatives(const MixtureView& m, double d, double* d1, double* d2) {
  // Component responsibilities via a stable softmax of log densities; then
  // nll' = sum resp_i z_i / sigma_i and
  // nll'' = -sum resp_i (z_i^2 - 1) / sigma_i^2 + (nll')^2.
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> logd(m.count), z(m.count), inv_sigma(m.count);
  for (int i = 0; i < m.count; ++i) {
    inv_sigma[i] = std::exp(-m.log_std[i]);
    z[i] = (d - m.mean[i]) * inv_sigma[i];
    logd[i] = m.weight[i] > 0.0
                  ? std::log(m.weight[i]) - 0.5 * z[i] * z[i] - m.log_std[i] - kLogSqrt2Pi
                  : -std::numeric_limits<double>::infinity();
    max_term = std::max(max_term, logd[i]);
  }
  double norm = 0.0;
  for (int i = 0; i < m.count; ++i) norm += std::exp(logd[i] - max_term);
  double g = 0.0, h = 0.0;
  for (int i = 0; i < m.count; ++i) {
    double resp = std::exp(logd[i] - max_term) / norm;
    g += resp * z[i] * inv_sigma[i];
    h += resp * (z[i] * z[i] - 1.0) * inv_sigma[i] * inv_sigma[i];
  }
  if (d1) *d1 = g;
  if (d2) *d2 = -h + g * g;
  return -(max_term + std::log(norm));
}

}  // namespace monosf
