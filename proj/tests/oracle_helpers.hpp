// Test-only oracles, kept independent of the implementation paths they check.
#pragma once

#include <cmath>
#include <functional>

#include "monosf/mixture.hpp"
#include "monosf/rng.hpp"

namespace oracle {

// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double fa,
                      double fb, double fm, double eps, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
  double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15 * eps)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, fm, flm, eps / 2, depth - 1) +
         simpson(f, m, b, fm, fb, frm, eps / 2, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double eps = 1e-10) {
  double m = 0.5 * (a + b);
  return simpson(f, a, b, f(a), f(b), f(m), eps, 40);
}

// Integration bounds padded well past the mixture support.
inline void support(const monosf::GaussianMixture1D& m, double sigmas, double* lo, double* hi) {
  *lo = m.means[0];
  *hi = m.means[0];
  for (int i = 0; i < m.count(); ++i) {
    double s = std::exp(m.log_stds[i]);
    *lo = std::min(*lo, m.means[i] - sigmas * s);
    *hi = std::max(*hi, m.means[i] + sigmas * s);
  }
}

// Direct linear-space NLL in extended precision; independent of the
// log-sum-exp path (long double survives exp(-800) at 40-sigma arguments).
inline long double nll_longdouble(const monosf::GaussianMixture1D& m, long double d) {
  const long double sqrt2pi = 2.506628274631000502415765284811045253L;
  long double p = 0.0L;
  for (int i = 0; i < m.count(); ++i) {
    long double sigma = expl((long double)m.log_stds[i]);
    long double z = (d - (long double)m.means[i]) / sigma;
    p += (long double)m.weights[i] * expl(-0.5L * z * z) / (sigma * sqrt2pi);
  }
  return -logl(p);
}

// Random mixture with comparable component scales.
inline monosf::GaussianMixture1D random_mixture(monosf::Rng& rng, int k) {
  std::vector<double> w(k), mu(k), s(k);
  double sum = 0;
  for (int i = 0; i < k; ++i) {
    w[i] = rng.uniform(0.1, 1.0);
    sum += w[i];
    mu[i] = rng.uniform(-1.0, 1.0);
    s[i] = std::log(rng.uniform(0.05, 0.8));
  }
  for (int i = 0; i < k; ++i) w[i] /= sum;
  return monosf::GaussianMixture1D(w, mu, s);
}

}  // namespace oracle
