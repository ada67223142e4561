#pragma once

#include <vector>

namespace monosf {

// Non-owning view of one mixture of Gaussians over inverse depth.
struct MixtureView {
  const double* weight = nullptr;   // lambda_i, sum to 1
  const double* mean = nullptr;     // mu_i (1/m)
  const double* log_std = nullptr;  // s_i = log sigma_i
  int count = 0;
};

// Owning mixture; invariants: weights >= 0 summing to 1, count >= 1.
struct GaussianMixture1D {
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> log_stds;

  GaussianMixture1D() = default;
  GaussianMixture1D(std::vector<double> w, std::vector<double> mu, std::vector<double> s);
  static GaussianMixture1D single(double mean, double sigma);

  int count() const { return int(weights.size()); }
  MixtureView view() const { return {weights.data(), means.data(), log_stds.data(), count()}; }
  bool valid(double weight_tol = 1e-6) const;
  void normalize_weights();
};

double mog_pdf(const MixtureView& m, double d);

// -log pdf, evaluated with log-sum-exp so that far-tail arguments stay finite.
double mog_nll(const MixtureView& m, double d);

double mog_cdf(const MixtureView& m, double d);

// Inverse cdf by bracketing + bisection; q must be in (0,1).
double mog_quantile(const MixtureView& m, double q);

double mog_mean(const MixtureView& m);

// Total variance: sum l_i (s_i^2 + mu_i^2) - mean^2.
double mog_variance(const MixtureView& m);

// Largest NLL on the boundary of the central `coverage` credible interval;
// used as the finite penalty for geometrically invalid depths.
double mog_nll_cap(const MixtureView& m, double coverage = 0.999);

// NLL with its first and second derivative in d (responsibility-weighted,
// numerically stable); either output pointer may be null.
double mog_nll_derivatives(const MixtureView& m, double d, double* d1, double* d2);

inline double mog_pdf(const GaussianMixture1D& m, double d) { return mog_pdf(m.view(), d); }
inline double mog_nll(const GaussianMixture1D& m, double d) { return mog_nll(m.view(), d); }
inline double mog_cdf(const GaussianMixture1D& m, double d) { return mog_cdf(m.view(), d); }
inline double mog_quantile(const GaussianMixture1D& m, double q) { return mog_quantile(m.view(), q); }
inline double mog_mean(const GaussianMixture1D& m) { return mog_mean(m.view()); }
inline double mog_variance(const GaussianMixture1D& m) { return mog_variance(m.view()); }

}  // namespace monosf
