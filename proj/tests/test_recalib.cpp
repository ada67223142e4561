#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "monosf/error.hpp"
#include "monosf/recalib.hpp"
#include "monosf/rng.hpp"
#include "oracle_helpers.hpp"

using namespace monosf;

namespace {

// Samples whose d_gt is an exact draw from the stored mixture, with the
// stored sigma optionally scaled by `sigma_factor` (1 = calibrated).
std::vector<CalibSample> synthetic_samples(size_t n, double sigma_factor, uint64_t seed,
                                           int k = 3) {
  Rng rng(seed);
  std::vector<CalibSample> out;
  out.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    GaussianMixture1D m = oracle::random_mixture(rng, k);
    // Draw from the mixture.
    double u = rng.uniform();
    int c = 0;
    double acc = 0;
    for (int j = 0; j < k; ++j) {
      acc += m.weights[j];
      if (u < acc) {
        c = j;
        break;
      }
    }
    double d = m.means[c] + std::exp(m.log_stds[c]) * rng.normal();
    for (double& s : m.log_stds) s += std::log(sigma_factor);
    out.push_back({std::move(m), d});
  }
  return out;
}

}  // namespace

TEST_CASE("apply_recalibration: identity, doubling, temperature limit") {
  Rng rng(41);
  GaussianMixture1D m = oracle::random_mixture(rng, 4);

  GaussianMixture1D id = apply_recalibration(RecalibMap::identity(), m);
  for (int i = 0; i < 4; ++i) {
    CHECK(id.weights[i] == doctest::Approx(m.weights[i]).epsilon(1e-12));
    CHECK(id.means[i] == doctest::Approx(m.means[i]).epsilon(1e-12));
    CHECK(id.log_stds[i] == doctest::Approx(m.log_stds[i]).epsilon(1e-12));
  }

  RecalibMap doubled{1.0, std::log(2.0), 1.0};
  GaussianMixture1D d2 = apply_recalibration(doubled, m);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::exp(d2.log_stds[i]) ==
          doctest::Approx(2.0 * std::exp(m.log_stds[i])).epsilon(1e-12));
    CHECK(d2.weights[i] == doctest::Approx(m.weights[i]).epsilon(1e-12));
  }

  RecalibMap hot{1.0, 0.0, 1e6};
  GaussianMixture1D flat = apply_recalibration(hot, m);
  for (int i = 0; i < 4; ++i) CHECK(flat.weights[i] == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("apply_recalibration preserves weight normalization and means") {
  Rng rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    GaussianMixture1D m = oracle::random_mixture(rng, 8);
    RecalibMap r{rng.uniform(0.3, 3.0), rng.uniform(-1.0, 1.0), rng.uniform(0.3, 3.0)};
    GaussianMixture1D out = apply_recalibration(r, m);
    double sum = 0;
    for (double w : out.weights) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    for (int i = 0; i < 8; ++i) CHECK(out.means[i] == m.means[i]);
  }
}

TEST_CASE("fit_recalibration: well-calibrated input stays near identity") {
  std::vector<CalibSample> samples = synthetic_samples(10000, 1.0, 43);
  RecalibMap fit = fit_recalibration(samples);
  CHECK(std::abs(fit.a - 1.0) <= 0.05);
  CHECK(std::abs(fit.b) <= 0.05);
  CHECK(mean_nll(samples, fit) <= mean_nll(samples) + 1e-12);
}

TEST_CASE("fit_recalibration recovers an under-reported sigma (known answer)") {
  // Stored sigma is half the generating sigma, so the fix is b = log 2.
  std::vector<CalibSample> samples = synthetic_samples(10000, 0.5, 44);
  RecalibMap fit = fit_recalibration(samples);
  CHECK(fit.b == doctest::Approx(std::log(2.0)).epsilon(0.15));
  CHECK(std::abs(fit.b - std::log(2.0)) <= 0.1);
  CHECK(mean_nll(samples, fit) < mean_nll(samples));
}

TEST_CASE("fit_recalibration never loses to the identity map") {
  for (uint64_t seed : {1u, 2u, 3u}) {
    std::vector<CalibSample> samples = synthetic_samples(500, 1.7, seed);
    RecalibMap fit = fit_recalibration(samples);
    CHECK(mean_nll(samples, fit) <= mean_nll(samples));
  }
}

TEST_CASE("fit_recalibration requires a minimum sample count") {
  std::vector<CalibSample> tiny = synthetic_samples(50, 1.0, 45);
  CHECK_THROWS_AS(fit_recalibration(tiny), InvalidArgument);
}

TEST_CASE("calibration_curve: calibrated data sits on the diagonal") {
  std::vector<CalibSample> samples = synthetic_samples(4000, 1.0, 46);
  std::vector<double> levels{0.2, 0.5, 0.8};
  auto curve = calibration_curve(samples, levels);
  for (auto [c, freq] : curve) {
    double se = std::sqrt(c * (1 - c) / double(samples.size()));
    CHECK(std::abs(freq - c) <= 3 * se);
  }
}

TEST_CASE("calibration_curve: ground truth at exact medians gives frequency 1") {
  Rng rng(47);
  std::vector<CalibSample> samples;
  for (int i = 0; i < 200; ++i) {
    GaussianMixture1D m = oracle::random_mixture(rng, 2);
    double med = mog_quantile(m, 0.5);
    samples.push_back({std::move(m), med});
  }
  for (auto [c, freq] : calibration_curve(samples, {0.1, 0.5, 0.9}))
    CHECK(freq == doctest::Approx(1.0));
}

TEST_CASE("calibration_curve: overconfident input falls below the diagonal") {
  std::vector<CalibSample> samples = synthetic_samples(4000, 0.5, 48);
  std::vector<double> levels{0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8};
  for (auto [c, freq] : calibration_curve(samples, levels)) CHECK(freq < c);
}

TEST_CASE("mean_nll: trivial values and improvement after fitting") {
  double sigma = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);
  std::vector<CalibSample> one{{GaussianMixture1D::single(0.5, sigma), 0.5}};
  CHECK(mean_nll(one) == doctest::Approx(0.0).epsilon(1e-12));

  std::vector<CalibSample> samples = synthetic_samples(2000, 0.5, 49);
  double before = 0;
  for (const CalibSample& s : samples) before += mog_nll(s.mixture, s.d_gt);
  CHECK(mean_nll(samples) == doctest::Approx(before / samples.size()).epsilon(1e-12));

  RecalibMap fit = fit_recalibration(samples);
  CHECK(mean_nll(samples, fit) < mean_nll(samples));
}

TEST_CASE("recalibrated resample stays on the diagonal") {
  // Resample fresh d_gt from the recalibrated mixtures; their curve must be
  // diagonal within binomial error.
  std::vector<CalibSample> miscal = synthetic_samples(3000, 0.6, 50);
  RecalibMap fit = fit_recalibration(miscal);
  Rng rng(51);
  std::vector<CalibSample> resampled;
  for (const CalibSample& s : miscal) {
    GaussianMixture1D m = apply_recalibration(fit, s.mixture);
    double u = rng.uniform();
    int c = 0;
    double acc = 0;
    for (int j = 0; j < m.count(); ++j) {
      acc += m.weights[j];
      if (u < acc) {
        c = j;
        break;
      }
    }
    double d = m.means[c] + std::exp(m.log_stds[c]) * rng.normal();
    resampled.push_back({std::move(m), d});
  }
  for (auto [c, freq] : calibration_curve(resampled, {0.2, 0.5, 0.8})) {
    double se = std::sqrt(c * (1 - c) / double(resampled.size()));
    CHECK(std::abs(freq - c) <= 3 * se);
  }
}

TEST_CASE("RecalibMap file round trip") {
  RecalibMap r{1.25, -0.3, 2.0};
  r.save("recalib_roundtrip.txt");
  RecalibMap back = RecalibMap::load("recalib_roundtrip.txt");
  CHECK(back.a == doctest::Approx(r.a).epsilon(1e-15));
  CHECK(back.b == doctest::Approx(r.b).epsilon(1e-15));
  CHECK(back.tau_w == doctest::Approx(r.tau_w).epsilon(1e-15));
}
