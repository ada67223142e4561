#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "monosf/error.hpp"
#include "monosf/metrics.hpp"
#include "monosf/rng.hpp"

using namespace monosf;

namespace {

EvalConfig config(double baseline_times_fx = 100.0) {
  EvalConfig cfg;
  cfg.baseline_times_fx = baseline_times_fx;
  return cfg;
}

struct RandomMaps {
  FloatImage est, gt;
  std::vector<uint8_t> valid;
  LabelImage instances;
};

RandomMaps random_depths(int w, int h, uint64_t seed) {
  RandomMaps m{FloatImage(w, h), FloatImage(w, h), std::vector<uint8_t>(size_t(w) * h, 1),
               LabelImage(w, h)};
  Rng rng(seed);
  for (int i = 0; i < w * h; ++i) {
    m.gt.values[i] = float(rng.uniform(0.02, 0.3));
    m.est.values[i] = float(m.gt.values[i] * rng.uniform(0.7, 1.3));
    m.valid[i] = rng.uniform() < 0.85 ? 1 : 0;
    m.instances.labels[i] = rng.uniform() < 0.3 ? 1 : 0;
  }
  return m;
}

}  // namespace

TEST_CASE("disparity rate: exact estimate scores 0") {
  RandomMaps m = random_depths(16, 8, 70);
  m.est = m.gt;
  RateResult r = disparity_error_rate(m.est, m.gt, m.valid, m.instances, config());
  CHECK(r.all == 0.0);
  CHECK(r.bg == 0.0);
  CHECK(r.fg == 0.0);
}

TEST_CASE("disparity rate: the 3px AND 5% conjunction") {
  // disp_gt = 100 px, disp_est = 104 px: 4 px over but only 4% -> no error.
  FloatImage gt(1, 1), est(1, 1);
  gt.values[0] = 1.0f;   // with baseline_times_fx=100 -> 100 px disparity
  est.values[0] = 1.04f;
  std::vector<uint8_t> valid{1};
  LabelImage inst(1, 1);
  EvalConfig cfg = config(100.0);
  CHECK(disparity_error_rate(est, gt, valid, inst, cfg).all == 0.0);

  // 8 px and 8% -> error.
  est.values[0] = 1.08f;
  CHECK(disparity_error_rate(est, gt, valid, inst, cfg).all == 100.0);

  // Small disparity: 3.5 px off a 10 px disparity is 35% -> error needs both.
  gt.values[0] = 0.1f;
  est.values[0] = 0.135f;
  CHECK(disparity_error_rate(est, gt, valid, inst, cfg).all == 100.0);
  est.values[0] = 0.125f;  // 2.5 px, 25% -> only relative exceeds
  CHECK(disparity_error_rate(est, gt, valid, inst, cfg).all == 0.0);
}

TEST_CASE("disparity rate matches a brute-force recount") {
  RandomMaps m = random_depths(24, 18, 71);
  EvalConfig cfg = config(60.0);
  RateResult r = disparity_error_rate(m.est, m.gt, m.valid, m.instances, cfg);
  size_t err = 0, n = 0;
  for (int i = 0; i < 24 * 18; ++i) {
    if (!m.valid[i]) continue;
    ++n;
    double de = 60.0 * m.est.values[i], dg = 60.0 * m.gt.values[i];
    if (std::abs(de - dg) > 3.0 && std::abs(de - dg) > 0.05 * dg) ++err;
  }
  CHECK(r.all == doctest::Approx(100.0 * double(err) / double(n)).epsilon(1e-12));
}

TEST_CASE("flow rate: trivial and below-threshold uniform error") {
  int w = 8, h = 6;
  FloatImage gu(w, h, 60.0f), gv(w, h, 80.0f);  // |gt| = 100
  FloatImage eu = gu, ev = gv;
  std::vector<uint8_t> valid(size_t(w) * h, 1);
  LabelImage inst(w, h);
  EvalConfig cfg = config();
  CHECK(flow_error_rate(eu, ev, gu, gv, valid, inst, cfg).all == 0.0);
  for (float& v : eu.values) v += 2.0f;  // epe 2 < 3 px
  CHECK(flow_error_rate(eu, ev, gu, gv, valid, inst, cfg).all == 0.0);
  for (float& v : eu.values) v += 8.0f;  // epe 10 > 3 px and 10% > 5%
  CHECK(flow_error_rate(eu, ev, gu, gv, valid, inst, cfg).all == 100.0);
}

TEST_CASE("sceneflow rate is the union of D1, D2, Fl errors") {
  int w = 3, h = 1;
  FloatImage gt_d0(w, h, 1.0f), gt_d1(w, h, 1.0f), gt_u(w, h, 0.0f), gt_v(w, h, 0.0f);
  FloatImage est_d0 = gt_d0, est_d1 = gt_d1, est_u = gt_u, est_v = gt_v;
  std::vector<uint8_t> valid(3, 1);
  LabelImage inst(w, h);
  EvalConfig cfg = config(100.0);

  // Pixel 0 fails only D1; pixel 1 fails only Fl; pixel 2 clean.
  est_d0.values[0] = 1.5f;
  est_u.values[1] = 30.0f;
  RateResult sf = sceneflow_error_rate(est_d0, est_d1, est_u, est_v, gt_d0, gt_d1, gt_u, gt_v,
                                       valid, inst, cfg);
  CHECK(sf.all == doctest::Approx(100.0 * 2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("MRE: exact, uniform 10% scale error, and the 50 m cap") {
  int w = 4, h = 1;
  FloatImage gt(w, h), est(w, h);
  std::vector<uint8_t> valid(4, 1);
  LabelImage inst(w, h);
  for (int i = 0; i < 3; ++i) gt.values[i] = 0.1f;  // 10 m
  gt.values[3] = 0.01f;                             // 100 m -> over the cap, skipped
  for (int i = 0; i < 4; ++i) est.values[i] = gt.values[i];
  EvalConfig cfg = config();
  CHECK(mean_relative_error(est, gt, valid, inst, cfg).all == 0.0);

  for (int i = 0; i < 4; ++i) est.values[i] = gt.values[i] / 1.1f;  // Z_est = 1.1 Z_gt
  RateResult r = mean_relative_error(est, gt, valid, inst, cfg);
  CHECK(r.all == doctest::Approx(10.0).epsilon(1e-6));
}

TEST_CASE("bg/fg error counts add up to the all-pixel counts") {
  RandomMaps m = random_depths(20, 20, 72);
  EvalConfig cfg = config(80.0);
  std::vector<uint8_t> err = disparity_error_map(m.est, m.gt, m.valid, cfg);
  size_t nbg = 0, nfg = 0, ebg = 0, efg = 0;
  for (int i = 0; i < 400; ++i) {
    if (!m.valid[i]) continue;
    (m.instances.labels[i] ? nfg : nbg) += 1;
    if (err[i]) (m.instances.labels[i] ? efg : ebg) += 1;
  }
  RateResult r = disparity_error_rate(m.est, m.gt, m.valid, m.instances, cfg);
  CHECK(r.bg == doctest::Approx(100.0 * double(ebg) / double(nbg)));
  CHECK(r.fg == doctest::Approx(100.0 * double(efg) / double(nfg)));
  CHECK(r.all == doctest::Approx(100.0 * double(ebg + efg) / double(nbg + nfg)));
}

TEST_CASE("with a 0 px absolute threshold the rate is exactly scale invariant") {
  RandomMaps m = random_depths(15, 11, 73);
  EvalConfig a = config(50.0);
  a.abs_threshold_px = 0.0;
  EvalConfig b = a;
  b.baseline_times_fx = 500.0;
  RateResult ra = disparity_error_rate(m.est, m.gt, m.valid, m.instances, a);
  RateResult rb = disparity_error_rate(m.est, m.gt, m.valid, m.instances, b);
  CHECK(ra.all == rb.all);
  CHECK(ra.bg == rb.bg);
  CHECK(ra.fg == rb.fg);
}

TEST_CASE("size mismatch is rejected") {
  FloatImage a(4, 4), b(5, 4);
  std::vector<uint8_t> valid(16, 1);
  LabelImage inst(4, 4);
  CHECK_THROWS_AS(disparity_error_rate(a, b, valid, inst, config()), InvalidArgument);
}

TEST_CASE("metrics CSV layout") {
  MetricsReport rep;
  rep.d1 = {1, 2, 3};
  rep.sf = {4, 5, 6};
  std::string csv = rep.to_csv();
  CHECK(csv.find("metric,bg,fg,all\n") == 0);
  CHECK(csv.find("D1,1,2,3") != std::string::npos);
  CHECK(csv.find("SF,4,5,6") != std::string::npos);
  CHECK(csv.find("MRE,0,0,0") != std::string::npos);
}
