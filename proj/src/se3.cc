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

#include "reach/se3.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "reach/errors.h"

namespace reach {
namespace {

Quat canonical(Quat q) {
  // Quaternions already unit to within 4 eps pass through unchanged.
  if (std::abs(q.squaredNorm() - 1.0) > 4.0 * std::numeric_limits<double>::epsilon()) q.normalize();
  if (q.w() < 0.0) q.coeffs() = -q.coeffs();
  return q;
}

}  // namespace

Pose::Pose(const Vec3& t, const Quat& r) : t_(t), r_(canonical(r)) {}

Pose::Pose(const Vec3& t, const Mat3& r) : t_(t), r_(canonical(Quat(r))) {}

Pose Pose::FromMatrix(const Mat4& m) {
  return Pose(m.block<3, 1>(0, 3), Mat3(m.block<3, 3>(0, 0)));
}

Pose Pose::FromArray(std::span<const double> v) {
  if (v.size() != 7) throw Error("pose needs 7 numbers");
  return Pose(Vec3(v[0], v[1], v[2]), Quat(v[3], v[4], v[5], v[6]));
}

Mat4 Pose::matrix() const {
  Mat4 m = Mat4::Identity();
  m.block<3, 3>(0, 0) = r_.toRotationMatrix();
  m.block<3, 1>(0, 3) = t_;
  return m;
}

std::array<double, 7> Pose::to_array() const {
  return {t_.x(), t_.y(), t_.z(), r_.w(), r_.x(), r_.y(), r_.z()};
}

Pose Pose::inverse() const {
  Quat inv = r_.conjugate();
  return Pose(-(inv * t_), inv);
}

Pose operator*(const Pose& a, const Pose& b) {
  return Pose(a.t_ + a.r_ * b.t_, a.r_ * b.r_);
}

Pose compose(const Pose& p1, const Pose& p2) { return p2 * p1; }

Pose inv_compose(const Pose& p1, const Pose& p2) {
  return p2.inverse() * p1;
}

double rotation_angle(const Quat& q) {
  double v = q.vec().norm();
  return 2.0 * std::atan2(v, std::abs(q.w()));
}

PoseError pose_error(const Pose& actual, const Pose& target) {
  PoseError e;
  e.trans_err = (actual.translation() - target.translation()).norm();
  Quat d = target.rotation().conjugate() * actual.rotation();
  e.rot_err = rad2deg(rotation_angle(d));
  return e;
}

Rot6D Rot6D::FromArray(std::span<const double> v) {
  if (v.size() != 6) throw Error("rot6d needs 6 numbers");
  return {Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])};
}

Rot6D rot6d_from_rotation(const Mat3& r) { return {r.col(0), r.col(1)}; }

Rot6D rot6d_from_pose(const Pose& p) {
  return rot6d_from_rotation(p.rotation_matrix());
}

Mat3 rotation_from_rot6d(const Rot6D& r6) {
  constexpr double kEps = 1e-6;
  double na = r6.a.norm();
  if (!(na > kEps)) throw DegenerateRot6D("first column has ~zero norm");
  Vec3 c1 = r6.a / na;
  Vec3 b = r6.b - r6.b.dot(c1) * c1;
  double nb = b.norm();
  if (!(nb > kEps)) throw DegenerateRot6D("columns are parallel");
  Vec3 c2 = b / nb;
  Mat3 r;
  r.col(0) = c1;
  r.col(1) = c2;
  r.col(2) = c1.cross(c2);
  return r;
}

Mat3 axis_angle(const Vec3& unit_axis, double angle) {
  return Eigen::AngleAxisd(angle, unit_axis).toRotationMatrix();
}

Vec3 log_so3(const Mat3& r) {
  Eigen::AngleAxisd aa(r);
  return aa.axis() * aa.angle();
}

Vec3 yaw_pitch_roll(const Mat3& r) {
  double pitch = std::asin(std::clamp(-r(2, 0), -1.0, 1.0));
  double yaw = std::atan2(r(1, 0), r(0, 0));
  double roll = std::atan2(r(2, 1), r(2, 2));
  return {yaw, pitch, roll};
}

Mat3 from_yaw_pitch_roll(double yaw, double pitch, double roll) {
  return (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
          Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
          Eigen::AngleAxisd(roll, Vec3::UnitX()))
      .toRotationMatrix();
}

}  // namespace reach
