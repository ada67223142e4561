#include "monosf/geometry.hpp"

#include <cmath>

#include "monosf/error.hpp"

namespace monosf {

Mat3 CameraIntrinsics::matrix() const {
  Mat3 k;
  k << fx, 0, cx, 0, fy, cy, 0, 0, 1;
  return k;
}

Mat3 CameraIntrinsics::inverse_matrix() const {
  Mat3 ki;
  ki << 1.0 / fx, 0, -cx / fx, 0, 1.0 / fy, -cy / fy, 0, 0, 1;
  return ki;
}

bool RigidMotion::is_orthonormal(double tol) const {
  Mat3 e = rotation.transpose() * rotation - Mat3::Identity();
  return e.cwiseAbs().maxCoeff() <= tol && std::abs(rotation.determinant() - 1.0) <= tol;
}

RigidMotion RigidMotion::compose(const RigidMotion& first) const {
  RigidMotion out;
  out.rotation = rotation * first.rotation;
  out.translation = rotation * first.translation + translation;
  return out;
}

RigidMotion RigidMotion::inverse() const {
  RigidMotion out;
  out.rotation = rotation.transpose();
  out.translation = -(rotation.transpose() * translation);
  return out;
}

Mat3 rotation_from_axis_angle(const Vec3& w) {
  double theta2 = w.squaredNorm();
  if (theta2 < 1e-24) {
    Mat3 skew;
    skew << 0, -w.z(), w.y(), w.z(), 0, -w.x(), -w.y(), w.x(), 0;
    return Mat3::Identity() + skew;
  }
  double theta = std::sqrt(theta2);
  return Eigen::AngleAxisd(theta, w / theta).toRotationMatrix();
}

Vec3 axis_angle_from_rotation(const Mat3& r) {
  Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

Mat3 homography_from_plane_motion(const CameraIntrinsics& k, const RigidMotion& t,
                                  const PlaneParam& n) {
  // X1 = R X0 + t and n.dot(X0) = 1 give X1 = (R + t n^T) X0 up to the
  // projective scale; the unit test pins this sign against the 3D transfer.
  Mat3 core = t.rotation + t.translation * n.n.transpose();
  return k.matrix() * core * k.inverse_matrix();
}

Vec3 backproject(const CameraIntrinsics& k, const Pixel& p0, const PlaneParam& n) {
  Vec3 ray = k.inverse_matrix() * p0.homogeneous();
  double d0 = n.n.dot(ray);
  if (!(d0 > 0.0))
    throw InvalidArgument("backproject: non-positive depth along pixel ray");
  return ray / d0;
}

Pixel project(const CameraIntrinsics& k, const Vec3& x) {
  if (!(x.z() > 0.0)) throw InvalidArgument("project: point behind camera");
  return {k.fx * x.x() / x.z() + k.cx, k.fy * x.y() / x.z() + k.cy};
}

double depth_at_t0(const Pixel& p0, const PlaneParam& n, const CameraIntrinsics& k) {
  return n.n.dot(k.inverse_matrix() * p0.homogeneous());
}

double depth_at_t1(const Pixel& p0, const PlaneParam& n, const RigidMotion& t,
                   const CameraIntrinsics& k) {
  Vec3 x1 = t.apply(backproject(k, p0, n));
  if (!(x1.z() > 0.0))
    throw InvalidArgument("depth_at_t1: transferred point behind camera");
  return 1.0 / x1.z();
}

bool apply_homography(const Mat3& h, const Pixel& p0, Pixel* p1) {
  Vec3 q = h * p0.homogeneous();
  if (!(q.z() > 0.0)) return false;
  p1->u = q.x() / q.z();
  p1->v = q.y() / q.z();
  return true;
}

}  // namespace monosf
