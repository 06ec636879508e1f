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

#ifndef REACH_ROBOT_H_
#define REACH_ROBOT_H_

#include <cstdint>
#include <string>

#include "reach/chain.h"
#include "reach/se3.h"

namespace reach {

// The kinematic description of the standing humanoid used throughout:
//  - `arm`: waist + one arm, rooted at the pelvis (10 joints).
//  - `planning`: `arm` behind a prismatic base-height joint, rooted at the
//    nominal standing pelvis frame. Planning vectors are [h, arm...].
//  - `leg`: the stance leg from ankle to pelvis, used for odometry.
struct Robot {
  KinematicChain arm;
  KinematicChain planning;
  KinematicChain leg;
  double pelvis_height = 0.75;  // standing pelvis height above the ground
  Pose ankle_world;             // static foot frame, world
  JointVector leg_home;         // leg angles holding the pelvis at nominal height
  JointVector ready;            // planning-chain start configuration

  int arm_dof() const { return arm.dof(); }
  int planning_dof() const { return planning.dof(); }
  std::uint64_t hash() const;

  // Pelvis pose in the world for base height h and a pelvis offset in the
  // ground plane.
  Pose standing_pelvis(double h) const;
};

struct RobotOptions {
  double pelvis_height = 0.75;
  double squat_depth = 0.20;  // base height limits are [-squat_depth, 0]
  Vec3 ankle_position = Vec3(0.0, 0.10, 0.06);
};

Robot make_robot(KinematicChain arm, KinematicChain leg, const RobotOptions& opt = {});

// Loads humanoid_right_arm_waist.chain and humanoid_left_leg.chain from
// `robots_dir`.
Robot load_robot(const std::string& robots_dir, const RobotOptions& opt = {});

}  // namespace reach

#endif  // REACH_ROBOT_H_
