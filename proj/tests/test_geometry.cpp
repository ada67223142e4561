#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "monosf/error.hpp"
#include "monosf/geometry.hpp"
#include "monosf/rng.hpp"

using namespace monosf;

namespace {

CameraIntrinsics test_camera() {
  CameraIntrinsics k;
  k.fx = 340.0;
  k.fy = 320.0;
  k.cx = 255.5;
  k.cy = 127.5;
  k.width = 512;
  k.height = 256;
  return k;
}

RigidMotion random_motion(Rng& rng, double rot_scale = 0.05, double trans_scale = 0.5) {
  RigidMotion t;
  Vec3 w(rng.normal(), rng.normal(), rng.normal());
  t.rotation = rotation_from_axis_angle(rot_scale * w);
  t.translation = trans_scale * Vec3(rng.normal(), rng.normal(), rng.normal());
  return t;
}

// Random plane with positive depth over the whole image.
PlaneParam random_plane(Rng& rng, const CameraIntrinsics& k) {
  for (;;) {
    double z = rng.uniform(4.0, 30.0);
    PlaneParam n;
    n.n = Vec3(rng.normal() * 0.02, rng.normal() * 0.02, 1.0 / z);
    bool ok = true;
    for (double u : {0.0, double(k.width - 1)})
      for (double v : {0.0, double(k.height - 1)})
        if (depth_at_t0({u, v}, n, k) <= 1e-4) ok = false;
    if (ok) return n;
  }
}

}  // namespace

TEST_CASE("homography: identity motion gives identity transfer") {
  CameraIntrinsics k = test_camera();
  PlaneParam n;
  n.n = Vec3(0.01, -0.02, 0.1);
  Mat3 h = homography_from_plane_motion(k, RigidMotion::identity(), n);
  CHECK((h - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("homography: pure rotation is independent of the plane") {
  CameraIntrinsics k = test_camera();
  RigidMotion t;
  t.rotation = rotation_from_axis_angle(Vec3(0.02, -0.01, 0.03));
  PlaneParam n1, n2;
  n1.n = Vec3(0.01, 0.0, 0.1);
  n2.n = Vec3(-0.03, 0.02, 0.05);
  Mat3 h1 = homography_from_plane_motion(k, t, n1);
  Mat3 h2 = homography_from_plane_motion(k, t, n2);
  Mat3 href = k.matrix() * t.rotation * k.inverse_matrix();
  CHECK((h1 - h2).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((h1 - href).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("homography transfer equals 3D transform-and-project (sign convention pin)") {
  CameraIntrinsics k = test_camera();
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    PlaneParam n = random_plane(rng, k);
    RigidMotion t = random_motion(rng);
    Pixel p0{rng.uniform(0, k.width - 1), rng.uniform(0, k.height - 1)};
    Vec3 x0 = backproject(k, p0, n);
    Vec3 x1 = t.apply(x0);
    if (x1.z() <= 0.1) continue;
    Pixel via_3d = project(k, x1);
    Mat3 h = homography_from_plane_motion(k, t, n);
    Pixel via_h;
    REQUIRE(apply_homography(h, p0, &via_h));
    CHECK(std::abs(via_h.u - via_3d.u) < 1e-6);
    CHECK(std::abs(via_h.v - via_3d.v) < 1e-6);
  }
}

TEST_CASE("homography composition matches two-step transfer on the plane") {
  CameraIntrinsics k = test_camera();
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    PlaneParam n = random_plane(rng, k);
    RigidMotion t1 = random_motion(rng, 0.02, 0.2);
    RigidMotion t2 = random_motion(rng, 0.02, 0.2);
    Pixel p0{rng.uniform(20, k.width - 20), rng.uniform(20, k.height - 20)};

    Mat3 h1 = homography_from_plane_motion(k, t1, n);
    Pixel p1;
    if (!apply_homography(h1, p0, &p1)) continue;

    // The t=1 plane in t=1 coordinates, for the second step.
    Vec3 rn = t1.rotation * n.n;
    double denom = 1.0 + rn.dot(t1.translation);
    if (std::abs(denom) < 1e-6) continue;
    PlaneParam n1;
    n1.n = rn / denom;
    Mat3 h2 = homography_from_plane_motion(k, t2, n1);
    Pixel p2_step;
    if (!apply_homography(h2, p1, &p2_step)) continue;

    Mat3 h12 = homography_from_plane_motion(k, t2.compose(t1), n);
    Pixel p2_direct;
    if (!apply_homography(h12, p0, &p2_direct)) continue;
    CHECK(std::abs(p2_step.u - p2_direct.u) < 1e-6);
    CHECK(std::abs(p2_step.v - p2_direct.v) < 1e-6);
  }
}

TEST_CASE("backproject: fronto-parallel plane hits the optical axis point") {
  CameraIntrinsics k = test_camera();
  PlaneParam n;
  n.n = Vec3(0, 0, 1.0 / 12.0);
  Vec3 x = backproject(k, {k.cx, k.cy}, n);
  CHECK(x.x() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(x.y() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(x.z() == doctest::Approx(12.0).epsilon(1e-12));
}

TEST_CASE("backproject satisfies the plane equation and reprojects to p0") {
  CameraIntrinsics k = test_camera();
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    PlaneParam n = random_plane(rng, k);
    Pixel p0{rng.uniform(0, k.width - 1), rng.uniform(0, k.height - 1)};
    Vec3 x = backproject(k, p0, n);
    CHECK(std::abs(n.n.dot(x) - 1.0) < 1e-9);
    Pixel back = project(k, x);
    CHECK(std::abs(back.u - p0.u) < 1e-9);
    CHECK(std::abs(back.v - p0.v) < 1e-9);
  }
}

TEST_CASE("backproject rejects non-positive depth") {
  CameraIntrinsics k = test_camera();
  PlaneParam n;
  n.n = Vec3(0, 0, -0.1);
  CHECK_THROWS_AS(backproject(k, {k.cx, k.cy}, n), InvalidArgument);
}

TEST_CASE("project basics") {
  CameraIntrinsics k = test_camera();
  Pixel p = project(k, {0, 0, 5.0});
  CHECK(p.u == doctest::Approx(k.cx));
  CHECK(p.v == doctest::Approx(k.cy));

  CameraIntrinsics unit;
  unit.fx = unit.fy = 1;
  unit.cx = unit.cy = 0;
  unit.width = unit.height = 2;
  Pixel q = project(unit, {1, 2, 2});
  CHECK(q.u == doctest::Approx(0.5));
  CHECK(q.v == doctest::Approx(1.0));
  CHECK_THROWS_AS(project(k, {0, 0, -1}), InvalidArgument);
}

TEST_CASE("depth_at_t0: fronto-parallel and ground-like planes") {
  CameraIntrinsics k = test_camera();
  PlaneParam fronto;
  fronto.n = Vec3(0, 0, 0.1);
  CHECK(depth_at_t0({3, 7}, fronto, k) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(depth_at_t0({500, 200}, fronto, k) == doctest::Approx(0.1).epsilon(1e-12));

  double h = 1.6;
  PlaneParam ground;
  ground.n = Vec3(0, 1.0 / h, 0);
  Pixel p{100, 200};
  double yprime = (p.v - k.cy) / k.fy;
  CHECK(depth_at_t0(p, ground, k) == doctest::Approx(yprime / h).epsilon(1e-12));
}

TEST_CASE("depth_at_t0 is linear in n and consistent with backproject") {
  CameraIntrinsics k = test_camera();
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    PlaneParam a = random_plane(rng, k);
    PlaneParam b = random_plane(rng, k);
    Pixel p{rng.uniform(0, k.width - 1), rng.uniform(0, k.height - 1)};
    double alpha = rng.uniform(-2, 2), beta = rng.uniform(-2, 2);
    PlaneParam mix;
    mix.n = alpha * a.n + beta * b.n;
    CHECK(depth_at_t0(p, mix, k) ==
          doctest::Approx(alpha * depth_at_t0(p, a, k) + beta * depth_at_t0(p, b, k))
              .epsilon(1e-12));
    CHECK(depth_at_t0(p, a, k) ==
          doctest::Approx(1.0 / backproject(k, p, a).z()).epsilon(1e-12));
  }
}

TEST_CASE("depth_at_t1: identity, pure z-shift, and random transfer oracle") {
  CameraIntrinsics k = test_camera();
  Rng rng(9);
  PlaneParam n;
  n.n = Vec3(0.002, -0.001, 0.08);
  Pixel p{100.0, 90.0};
  CHECK(depth_at_t1(p, n, RigidMotion::identity(), k) ==
        doctest::Approx(depth_at_t0(p, n, k)).epsilon(1e-12));

  RigidMotion shift;
  shift.translation = Vec3(0, 0, 2.5);
  double z0 = backproject(k, p, n).z();
  CHECK(1.0 / depth_at_t1(p, n, shift, k) == doctest::Approx(z0 + 2.5).epsilon(1e-12));

  for (int trial = 0; trial < 100; ++trial) {
    PlaneParam np = random_plane(rng, k);
    RigidMotion t = random_motion(rng);
    Pixel q{rng.uniform(0, k.width - 1), rng.uniform(0, k.height - 1)};
    Vec3 x1 = t.apply(backproject(k, q, np));
    if (x1.z() <= 0.1) continue;
    double expect = 1.0 / x1.z();
    CHECK(depth_at_t1(q, np, t, k) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("rigid motion helpers") {
  Rng rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    RigidMotion t = random_motion(rng, 0.5, 2.0);
    CHECK(t.is_orthonormal());
    RigidMotion eye = t.compose(t.inverse());
    CHECK((eye.rotation - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(eye.translation.cwiseAbs().maxCoeff() < 1e-12);
    Vec3 w(rng.normal(), rng.normal(), rng.normal());
    Vec3 back = axis_angle_from_rotation(rotation_from_axis_angle(0.3 * w));
    CHECK((back - 0.3 * w).cwiseAbs().maxCoeff() < 1e-9);
  }
}
