#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "monosf/census.hpp"
#include "monosf/error.hpp"
#include "monosf/rng.hpp"

using namespace monosf;

namespace {

GrayImage random_image(int w, int h, uint64_t seed, int lo = 0, int hi = 255) {
  GrayImage img(w, h);
  Rng rng(seed);
  for (uint8_t& p : img.pixels) p = uint8_t(rng.below(uint64_t(hi - lo + 1)) + lo);
  return img;
}

Mat3 translation_homography(double du, double dv) {
  Mat3 h = Mat3::Identity();
  h(0, 2) = du;
  h(1, 2) = dv;
  return h;
}

}  // namespace

TEST_CASE("census: constant image gives all-zero descriptors") {
  GrayImage img(16, 12, 85);
  CensusMap map = census_transform(img);
  for (uint32_t d : map.descriptors) CHECK(d == 0);
}

TEST_CASE("census: extreme centers (bit set iff neighbor darker than center)") {
  // All 24 neighbors darker than the center -> all bits set.
  GrayImage bright(9, 9, 10);
  bright.at(4, 4) = 200;
  CHECK(census_transform(bright).at(4, 4) == 0xffffffu);

  // Center darker than every neighbor -> no neighbor compares below it.
  GrayImage dark(9, 9, 200);
  dark.at(4, 4) = 10;
  CHECK(census_transform(dark).at(4, 4) == 0);
}

TEST_CASE("census: every bit equals the direct comparison (oracle)") {
  GrayImage img = random_image(31, 17, 99);
  CensusMap map = census_transform(img);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      uint32_t d = map.at(x, y);
      int bit = 0;
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
          if (dx == 0 && dy == 0) continue;
          bool expect = img.at_clamped(x + dx, y + dy) < img.at(x, y);
          CHECK(((d >> bit) & 1u) == (expect ? 1u : 0u));
          ++bit;
        }
    }
}

TEST_CASE("census rejects too-small images") {
  GrayImage img(4, 8, 0);
  CHECK_THROWS_AS(census_transform(img), InvalidArgument);
}

TEST_CASE("census translation equivariance on the interior") {
  GrayImage img = random_image(40, 30, 7);
  int du = 3, dv = 2;
  GrayImage shifted(40, 30);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x)
      shifted.at(x, y) = img.at_clamped(x - du, y - dv);
  CensusMap a = census_transform(img);
  CensusMap b = census_transform(shifted);
  for (int y = dv + 2; y < 30 - 2; ++y)
    for (int x = du + 2; x < 40 - 2; ++x) CHECK(b.at(x, y) == a.at(x - du, y - dv));
}

TEST_CASE("hamming24 basics and bit-loop oracle") {
  CHECK(hamming24(0x123456u, 0x123456u) == 0);
  CHECK(hamming24(0xffffffu, 0x000000u) == 24);
  CHECK(hamming24(0xaaaaaau, 0x555555u) == 24);
  Rng rng(55);
  for (int trial = 0; trial < 100; ++trial) {
    uint32_t a = uint32_t(rng.next_u64()) & 0xffffffu;
    uint32_t b = uint32_t(rng.next_u64()) & 0xffffffu;
    int manual = 0;
    for (int i = 0; i < 24; ++i) manual += int((a >> i) & 1u) != int((b >> i) & 1u);
    CHECK(hamming24(a, b) == manual);
  }
}

TEST_CASE("photometric cost: identical images under identity warp cost 0") {
  GrayImage img = random_image(32, 24, 12);
  CensusMap c = census_transform(img);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      CHECK(photometric_cost({double(x), double(y)}, Mat3::Identity(), c, c, 20.0) == 0.0);
}

TEST_CASE("photometric cost: out-of-image and behind-camera warps cost tau0") {
  GrayImage img = random_image(32, 24, 13);
  CensusMap c = census_transform(img);
  CHECK(photometric_cost({2, 2}, translation_homography(1000, 0), c, c, 17.5) == 17.5);
  Mat3 flip = -Mat3::Identity();  // homogeneous w < 0
  CHECK(photometric_cost({2, 2}, flip, c, c, 17.5) == 17.5);
}

TEST_CASE("photometric cost under a known integer shift (synthetic warp oracle)") {
  // Integer-translation warp keeps descriptors bit-identical, so the true
  // warp costs 0 away from the border; a 3 px off warp costs more on average.
  GrayImage img = random_image(64, 48, 14);
  int du = 5, dv = -3;
  GrayImage img1(64, 48);
  for (int y = 0; y < 48; ++y)
    for (int x = 0; x < 64; ++x) img1.at(x, y) = img.at_clamped(x - du, y - dv);
  CensusMap c0 = census_transform(img);
  CensusMap c1 = census_transform(img1);

  Mat3 true_h = translation_homography(du, dv);
  Mat3 off_h = translation_homography(du + 3, dv);
  int zero = 0, total = 0;
  double sum_true = 0, sum_off = 0;
  for (int y = 4; y < 44; ++y)
    for (int x = 4; x < 54; ++x) {
      Pixel p{double(x), double(y)};
      double ct = photometric_cost(p, true_h, c0, c1, 20.0);
      sum_true += ct;
      sum_off += photometric_cost(p, off_h, c0, c1, 20.0);
      zero += ct == 0.0;
      ++total;
    }
  CHECK(double(zero) / total >= 0.99);
  CHECK(sum_off > sum_true);
}

TEST_CASE("photometric cost stays within [0, tau0]") {
  GrayImage a = random_image(20, 20, 15);
  GrayImage b = random_image(20, 20, 16);
  CensusMap ca = census_transform(a), cb = census_transform(b);
  Rng rng(17);
  for (int trial = 0; trial < 500; ++trial) {
    Pixel p{rng.uniform(0, 19), rng.uniform(0, 19)};
    Mat3 h = translation_homography(rng.uniform(-30, 30), rng.uniform(-30, 30));
    double tau = rng.uniform(0.5, 24.0);
    double cost = photometric_cost(p, h, ca, cb, tau);
    CHECK(cost >= 0.0);
    CHECK(cost <= tau);
  }
}

TEST_CASE("census cost is invariant to positive-gain affine intensity changes") {
  GrayImage img = random_image(40, 30, 18, 0, 120);  // headroom for gain 1.5 + bias 20
  GrayImage adjusted(40, 30);
  for (size_t i = 0; i < img.pixels.size(); ++i) {
    double v = 1.5 * img.pixels[i] + 20.0;
    REQUIRE(v <= 255.0);
    adjusted.pixels[i] = uint8_t(std::lround(v));
  }
  CensusMap c0 = census_transform(img);
  CensusMap c1 = census_transform(adjusted);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x)
      CHECK(photometric_cost({double(x), double(y)}, Mat3::Identity(), c0, c1, 24.0) == 0.0);
}
