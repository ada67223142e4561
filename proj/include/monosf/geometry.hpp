#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace monosf {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

// Pinhole camera without distortion.
struct CameraIntrinsics {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;

  bool valid() const {
    return fx > 0 && fy > 0 && cx >= 0 && cx < width && cy >= 0 && cy < height;
  }
  Mat3 matrix() const;
  Mat3 inverse_matrix() const;
};

// SE(3) motion mapping t=0 camera-frame points to t=1 camera-frame points:
// X1 = R * X0 + t.
struct RigidMotion {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  static RigidMotion identity() { return {}; }
  bool is_orthonormal(double tol = 1e-9) const;
  Vec3 apply(const Vec3& x) const { return rotation * x + translation; }
  RigidMotion compose(const RigidMotion& first) const;  // this ∘ first
  RigidMotion inverse() const;
};

// Plane as a scaled normal: n.dot(X) == 1 for camera-frame points X on the
// plane at t=0. Per-pixel inverse depth is linear in n.
struct PlaneParam {
  Vec3 n = Vec3::Zero();
};

struct Pixel {
  double u = 0, v = 0;
  Vec3 homogeneous() const { return {u, v, 1.0}; }
};

// Rodrigues map, axis-angle -> rotation matrix (stable near zero).
Mat3 rotation_from_axis_angle(const Vec3& w);
Vec3 axis_angle_from_rotation(const Mat3& r);

// H = K (R + t n^T) K^-1 with the frame-0 -> frame-1 convention above:
// for on-plane points, dehomogenized H*p0 is the projection of R*X0 + t.
Mat3 homography_from_plane_motion(const CameraIntrinsics& k, const RigidMotion& t,
                                  const PlaneParam& n);

// Ray-plane intersection; requires n.dot(K^-1 p0) > 0.
Vec3 backproject(const CameraIntrinsics& k, const Pixel& p0, const PlaneParam& n);

// Pinhole projection; requires x.z() > 0.
Pixel project(const CameraIntrinsics& k, const Vec3& x);

// Inverse depth of the plane along the ray of p0; may be <= 0, callers decide
// validity.
double depth_at_t0(const Pixel& p0, const PlaneParam& n, const CameraIntrinsics& k);

// Inverse depth after applying the body motion; requires positive depth at
// both times.
double depth_at_t1(const Pixel& p0, const PlaneParam& n, const RigidMotion& t,
                   const CameraIntrinsics& k);

// Dehomogenize h * p0; returns false if the homogeneous w is <= 0.
bool apply_homography(const Mat3& h, const Pixel& p0, Pixel* p1);

}  // namespace monosf
