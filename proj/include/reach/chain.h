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

// Serial kinematic chains: description format, forward kinematics and the
// geometric Jacobian.

#ifndef REACH_CHAIN_H_
#define REACH_CHAIN_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "reach/se3.h"

namespace reach {

using JointVector = Eigen::VectorXd;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

enum class JointType { kRevolute, kPrismatic };

struct Joint {
  std::string name;
  std::string parent;  // parent link
  std::string child;   // child link; defaults to the joint name
  JointType type = JointType::kRevolute;
  Vec3 axis = Vec3::UnitZ();
  Pose origin;  // fixed transform from the parent joint frame
  double lower = 0.0;
  double upper = 0.0;

  bool locked() const { return lower == upper; }
};

class KinematicChain {
 public:
  KinematicChain() = default;
  // Validates the structure; throws ValidationError.
  KinematicChain(std::string name, std::vector<Joint> joints, Pose ee_offset);

  const std::string& name() const { return name_; }
  const std::vector<Joint>& joints() const { return joints_; }
  const Joint& joint(int i) const { return joints_[i]; }
  const Pose& ee_offset() const { return ee_offset_; }
  int dof() const { return static_cast<int>(joints_.size()); }
  int index_of(std::string_view joint_name) const;  // -1 when absent

  JointVector lower() const;
  JointVector upper() const;
  JointVector clamp(const JointVector& q) const;
  bool within_limits(const JointVector& q, double tol = 0.0) const;

  // Canonical text form; parse_chain(to_text()) reproduces the chain.
  std::string to_text() const;
  std::uint64_t hash() const;

  // Copy with joints in `names` pinned to their value `at` (lo = hi = at).
  KinematicChain with_locked(const std::vector<std::string>& names, double at = 0.0) const;
  // Copy with a new joint in front of the first one.
  KinematicChain with_root_joint(const Joint& root) const;
  // Copy whose link translations (joint origins and ee offset) are scaled;
  // `scales` has dof()+1 entries, the last one for the ee offset.
  KinematicChain with_link_scales(const Eigen::VectorXd& scales) const;

 private:
  std::string name_;
  std::vector<Joint> joints_;
  Pose ee_offset_;
};

KinematicChain parse_chain(std::string_view text);
KinematicChain load_chain(const std::string& path);

// Joint frames along the chain in the chain base frame.
struct ChainFrames {
  std::vector<Vec3> origin;  // joint i origin
  std::vector<Vec3> axis;    // joint i axis, base frame
  Pose ee;
};

ChainFrames chain_frames(const KinematicChain& chain, const JointVector& q);

// End-effector pose in the chain base frame.
Pose fk(const KinematicChain& chain, const JointVector& q);

// Geometric Jacobian about the end-effector point: rows 0-2 linear (m/rad or
// m/m), rows 3-5 angular.
Jacobian jacobian(const KinematicChain& chain, const JointVector& q);

// Gravity-moment surrogate per joint: torque about each joint axis from unit
// weights hanging at every distal joint origin and at the end-effector, with
// gravity along -z of the chain base. Prismatic joints report zero.
Eigen::VectorXd gravity_load(const KinematicChain& chain, const JointVector& q);

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 1469598103934665603ull);
std::string hex64(std::uint64_t h);

}  // namespace reach

#endif  // REACH_CHAIN_H_
