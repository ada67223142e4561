#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <fstream>

#include "monosf/depth_map.hpp"
#include "monosf/error.hpp"
#include "monosf/mixture.hpp"
#include "monosf/rng.hpp"
#include "oracle_helpers.hpp"

using namespace monosf;

TEST_CASE("pdf: single Gaussian mode value") {
  GaussianMixture1D m = GaussianMixture1D::single(0.5, 0.1);
  CHECK(mog_pdf(m, 0.5) == doctest::Approx(3.9894228040143267).epsilon(1e-9));
}

TEST_CASE("pdf: symmetric two-component mixture at the midpoint") {
  double a = 0.3, sigma = 0.2;
  GaussianMixture1D m({0.5, 0.5}, {-a, a}, {std::log(sigma), std::log(sigma)});
  GaussianMixture1D ref = GaussianMixture1D::single(a, sigma);
  CHECK(mog_pdf(m, 0.0) == doctest::Approx(mog_pdf(ref, 0.0)).epsilon(1e-12));
}

TEST_CASE("pdf normalizes to 1 (quadrature oracle, random mixtures)") {
  Rng rng(21);
  for (int k : {1, 2, 4, 8}) {
    for (int trial = 0; trial < 10; ++trial) {
      GaussianMixture1D m = oracle::random_mixture(rng, k);
      double lo, hi;
      oracle::support(m, 12.0, &lo, &hi);
      double mass = oracle::integrate([&](double d) { return mog_pdf(m, d); }, lo, hi);
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
}

TEST_CASE("nll: exact zeros and Gaussian algebra") {
  double sigma = 1.0 / std::sqrt(2.0 * 3.14159265358979323846);
  GaussianMixture1D m = GaussianMixture1D::single(0.7, sigma);
  CHECK(mog_nll(m, 0.7) == doctest::Approx(0.0).epsilon(1e-12));

  GaussianMixture1D g = GaussianMixture1D::single(0.2, 0.05);
  double expect = 0.5 + std::log(0.05 * std::sqrt(2.0 * 3.14159265358979323846));
  CHECK(mog_nll(g, 0.2 + 0.05) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("nll matches extended-precision evaluation into the far tail") {
  Rng rng(22);
  for (int k : {1, 2, 4, 8}) {
    for (int trial = 0; trial < 10; ++trial) {
      GaussianMixture1D m = oracle::random_mixture(rng, k);
      double sigma0 = std::exp(m.log_stds[0]);
      for (double offset : {0.0, 2.5, 10.0, 40.0}) {
        double d = m.means[0] + offset * sigma0;
        double got = mog_nll(m, d);
        long double want = oracle::nll_longdouble(m, d);
        CHECK(std::isfinite(got));
        CHECK(std::abs(got - double(want)) <=
              1e-6 * std::max(1.0, std::abs(double(want))));
      }
    }
  }
}

TEST_CASE("cdf basics and quadrature agreement") {
  GaussianMixture1D m = GaussianMixture1D::single(0.4, 0.07);
  CHECK(mog_cdf(m, 0.4) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(mog_cdf(m, 0.4 + 20 * 0.07) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mog_cdf(m, 0.4 - 20 * 0.07) == doctest::Approx(0.0).epsilon(1e-12));

  Rng rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    GaussianMixture1D mm = oracle::random_mixture(rng, 4);
    double lo, hi;
    oracle::support(mm, 14.0, &lo, &hi);
    for (double q : {0.2, 0.5, 0.9}) {
      double d = mog_quantile(mm, q);
      double mass = oracle::integrate([&](double x) { return mog_pdf(mm, x); }, lo, d);
      CHECK(mass == doctest::Approx(mog_cdf(mm, d)).epsilon(1e-8));
    }
  }
}

TEST_CASE("cdf is monotone on a sampled grid") {
  Rng rng(24);
  GaussianMixture1D m = oracle::random_mixture(rng, 8);
  double lo, hi;
  oracle::support(m, 10.0, &lo, &hi);
  double prev = -1.0;
  for (int i = 0; i <= 500; ++i) {
    double c = mog_cdf(m, lo + (hi - lo) * i / 500.0);
    CHECK(c >= prev - 1e-15);
    prev = c;
  }
}

TEST_CASE("quantile: symmetric median, round trip, normal table value") {
  double a = 0.25, sigma = 0.1, c = 0.6;
  GaussianMixture1D sym({0.5, 0.5}, {c - a, c + a}, {std::log(sigma), std::log(sigma)});
  CHECK(mog_quantile(sym, 0.5) == doctest::Approx(c).epsilon(1e-9));

  GaussianMixture1D g = GaussianMixture1D::single(0.3, 0.05);
  CHECK(mog_quantile(g, 0.841345) == doctest::Approx(0.3 + 0.05).epsilon(1e-6));

  Rng rng(25);
  for (int trial = 0; trial < 10; ++trial) {
    GaussianMixture1D m = oracle::random_mixture(rng, 4);
    for (double q : {0.01, 0.2, 0.5, 0.77, 0.995}) {
      CHECK(mog_cdf(m, mog_quantile(m, q)) == doctest::Approx(q).epsilon(1e-8));
    }
  }
  CHECK_THROWS_AS(mog_quantile(g, 0.0), InvalidArgument);
  CHECK_THROWS_AS(mog_quantile(g, 1.0), InvalidArgument);
}

TEST_CASE("mean: trivial and first-moment quadrature") {
  GaussianMixture1D g = GaussianMixture1D::single(0.42, 0.1);
  CHECK(mog_mean(g) == doctest::Approx(0.42));
  GaussianMixture1D two({0.5, 0.5}, {0.2, 0.4}, {std::log(0.05), std::log(0.05)});
  CHECK(mog_mean(two) == doctest::Approx(0.3).epsilon(1e-12));

  Rng rng(26);
  GaussianMixture1D m = oracle::random_mixture(rng, 4);
  double lo, hi;
  oracle::support(m, 14.0, &lo, &hi);
  double moment = oracle::integrate([&](double d) { return d * mog_pdf(m, d); }, lo, hi);
  CHECK(mog_mean(m) == doctest::Approx(moment).epsilon(1e-6));
}

TEST_CASE("variance matches second-moment quadrature") {
  Rng rng(27);
  GaussianMixture1D m = oracle::random_mixture(rng, 4);
  double lo, hi;
  oracle::support(m, 14.0, &lo, &hi);
  double mu = mog_mean(m);
  double var =
      oracle::integrate([&](double d) { return (d - mu) * (d - mu) * mog_pdf(m, d); }, lo, hi);
  CHECK(mog_variance(m) == doctest::Approx(var).epsilon(1e-6));
}

TEST_CASE("nll derivatives match central finite differences") {
  Rng rng(28);
  for (int trial = 0; trial < 50; ++trial) {
    GaussianMixture1D m = oracle::random_mixture(rng, 4);
    double d = rng.uniform(-1.5, 1.5);
    double g, h;
    mog_nll_derivatives(m.view(), d, &g, &h);
    double eps = 1e-6;
    double fp = mog_nll(m, d + eps), fm = mog_nll(m, d - eps), f0 = mog_nll(m, d);
    CHECK(g == doctest::Approx((fp - fm) / (2 * eps)).epsilon(1e-4));
    CHECK(h == doctest::Approx((fp - 2 * f0 + fm) / (eps * eps)).epsilon(2e-3));
  }
}

TEST_CASE("nll cap bounds the nll inside the credible interval") {
  Rng rng(29);
  for (int trial = 0; trial < 10; ++trial) {
    GaussianMixture1D m = oracle::random_mixture(rng, 4);
    double cap = mog_nll_cap(m.view(), 0.999);
    double lo = mog_quantile(m, 0.0005), hi = mog_quantile(m, 0.9995);
    for (int i = 0; i <= 50; ++i) {
      double d = lo + (hi - lo) * i / 50.0;
      CHECK(mog_nll(m, d) <= cap + 1e-9);
    }
  }
}

TEST_CASE("DepthDistMap round trip through MOGD; weight tolerance enforced") {
  Rng rng(30);
  DepthDistMap map(7, 5, 3);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) map.set(x, y, oracle::random_mixture(rng, 3));
  map.save("mogd_roundtrip.bin");
  DepthDistMap back = DepthDistMap::load("mogd_roundtrip.bin");
  REQUIRE(back.width() == 7);
  REQUIRE(back.height() == 5);
  REQUIRE(back.components() == 3);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) {
      MixtureView a = map.at(x, y), b = back.at(x, y);
      for (int i = 0; i < 3; ++i) {
        CHECK(b.weight[i] == doctest::Approx(a.weight[i]).epsilon(1e-6));
        CHECK(b.mean[i] == doctest::Approx(a.mean[i]).epsilon(1e-6));
        CHECK(b.log_std[i] == doctest::Approx(a.log_std[i]).epsilon(1e-6));
      }
    }

  // A file whose weights are badly off must be rejected.
  DepthDistMap bad(2, 2, 1);
  for (int y = 0; y < 2; ++y)
    for (int x = 0; x < 2; ++x)
      bad.set(x, y, GaussianMixture1D({1.0}, {0.1}, {std::log(0.05)}));
  // Poke the stored weight after the fact via a raw rewrite.
  bad.save("mogd_bad.bin");
  {
    std::fstream f("mogd_bad.bin",
                   std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(20);
    float w = 0.5f;
    f.write(reinterpret_cast<const char*>(&w), 4);
  }
  CHECK_THROWS_AS(DepthDistMap::load("mogd_bad.bin"), IoError);
}

TEST_CASE("MOGC round trip") {
  Rng rng(31);
  std::vector<CalibSample> samples;
  for (int i = 0; i < 20; ++i)
    samples.push_back({oracle::random_mixture(rng, 2), rng.uniform(0.05, 0.3)});
  save_calib_samples("mogc_roundtrip.bin", samples);
  std::vector<CalibSample> back = load_calib_samples("mogc_roundtrip.bin");
  REQUIRE(back.size() == samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    CHECK(back[i].d_gt == doctest::Approx(samples[i].d_gt).epsilon(1e-6));
    CHECK(back[i].mixture.means[1] ==
          doctest::Approx(samples[i].mixture.means[1]).epsilon(1e-6));
  }
}
