// Copyright 2026 The residual-reach Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Rigid-body poses and the composition convention used throughout the stack.
//
// Two products exist and they are easy to mix up:
//
//   a * b              ordinary homogeneous product M(a) * M(b).
//   compose(p1, p2)    the "p1 (+) p2" operator, defined right-to-left as
//                      M(p2) * M(p1).
//   inv_compose(p1, p2)  "p1 (-) p2" = M(p2)^-1 * M(p1).
//
// Residual estimators use compose/inv_compose; kinematics code uses operator*.

#ifndef REACH_SE3_H_
#define REACH_SE3_H_

#include <array>
#include <span>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace reach {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Quat = Eigen::Quaterniond;

// SE(3) element: translation in meters and a unit quaternion. The quaternion
// is renormalized on construction and kept on the w >= 0 hemisphere.
class Pose {
 public:
  Pose() : t_(Vec3::Zero()), r_(Quat::Identity()) {}
  Pose(const Vec3& t, const Quat& r);
  Pose(const Vec3& t, const Mat3& r);

  static Pose Identity() { return Pose(); }
  static Pose FromTranslation(const Vec3& t) { return Pose(t, Quat::Identity()); }
  static Pose FromRotation(const Quat& r) { return Pose(Vec3::Zero(), r); }
  static Pose FromMatrix(const Mat4& m);
  // [tx, ty, tz, qw, qx, qy, qz]
  static Pose FromArray(std::span<const double> values);

  const Vec3& translation() const { return t_; }
  const Quat& rotation() const { return r_; }
  Mat3 rotation_matrix() const { return r_.toRotationMatrix(); }
  Mat4 matrix() const;
  std::array<double, 7> to_array() const;

  Pose inverse() const;
  Vec3 transform_point(const Vec3& p) const { return r_ * p + t_; }

  // Homogeneous product M(a) * M(b).
  friend Pose operator*(const Pose& a, const Pose& b);

 private:
  Vec3 t_;
  Quat r_;
};

// p1 (+) p2 = M(p2) * M(p1). Note the reversed argument order.
Pose compose(const Pose& p1, const Pose& p2);

// p1 (-) p2 = M(p2)^-1 * M(p1). compose(inv_compose(p1, p2), p2) == p1.
Pose inv_compose(const Pose& p1, const Pose& p2);

struct PoseError {
  double trans_err = 0.0;  // meters
  double rot_err = 0.0;    // degrees, geodesic, in [0, 180]
};

// Euclidean translation distance and geodesic angle of R_target^-1 R_actual.
PoseError pose_error(const Pose& actual, const Pose& target);

// Geodesic angle of a rotation in radians, in [0, pi].
double rotation_angle(const Quat& q);

// First two columns of a rotation matrix.
struct Rot6D {
  Vec3 a = Vec3::UnitX();
  Vec3 b = Vec3::UnitY();

  std::array<double, 6> to_array() const {
    return {a.x(), a.y(), a.z(), b.x(), b.y(), b.z()};
  }
  static Rot6D FromArray(std::span<const double> v);
};

Rot6D rot6d_from_rotation(const Mat3& r);
Rot6D rot6d_from_pose(const Pose& p);

// Gram-Schmidt decode. Throws DegenerateRot6D when a is ~0 or a || b.
Mat3 rotation_from_rot6d(const Rot6D& r6);

// Axis-angle helpers.
Mat3 axis_angle(const Vec3& unit_axis, double angle);
Vec3 log_so3(const Mat3& r);

// Intrinsic Z-Y-X Euler angles (yaw, pitch, roll) and back.
Vec3 yaw_pitch_roll(const Mat3& r);
Mat3 from_yaw_pitch_roll(double yaw, double pitch, double roll);

constexpr double kPi = 3.14159265358979323846;
constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

}  // namespace reach

#endif  // REACH_SE3_H_
