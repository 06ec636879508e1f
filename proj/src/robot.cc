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

#include "reach/robot.h"

#include <cmath>

#include "reach/errors.h"
#include "reach/ik.h"

namespace reach {

std::uint64_t Robot::hash() const {
  std::uint64_t h = fnv1a(planning.to_text());
  h = fnv1a(leg.to_text(), h);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", pelvis_height);
  return fnv1a(buf, h);
}

Pose Robot::standing_pelvis(double h) const {
  return Pose::FromTranslation(Vec3(0.0, 0.0, pelvis_height + h));
}

Robot make_robot(KinematicChain arm, KinematicChain leg, const RobotOptions& opt) {
  if (arm.dof() != 10) throw ValidationError(arm.name(), "arm chain must have 10 joints");
  if (leg.dof() != 6) throw ValidationError(leg.name(), "leg chain must have 6 joints");
  if (!(opt.squat_depth > 0.0)) throw ConfigError("squat depth must be positive");
  Robot r;
  r.pelvis_height = opt.pelvis_height;
  r.ankle_world = Pose::FromTranslation(opt.ankle_position);

  Joint height;
  height.name = "base_height";
  height.parent = "ground";
  height.type = JointType::kPrismatic;
  height.axis = Vec3::UnitZ();
  height.lower = -opt.squat_depth;
  height.upper = 0.0;
  r.planning = arm.with_root_joint(height);

  // Bent-knee seed; the solve below pins it to the nominal pelvis pose.
  JointVector seed(6);
  seed << 0.0, 0.3, -0.6, 0.3, 0.0, 0.0;
  IkConfig cfg;
  cfg.damping = 1e-4;
  cfg.pos_tol = 1e-10;
  cfg.rot_tol_deg = 1e-8;
  cfg.max_iterations = 200;
  cfg.restarts = 0;
  cfg.stall_window = 0;
  Pose target = r.ankle_world.inverse() * r.standing_pelvis(0.0);
  IkResult ik = solve_ik(leg, target, seed, cfg);
  if (ik.residual.trans_err > 1e-8) {
    throw ValidationError(leg.name(), "leg cannot hold the nominal pelvis height");
  }
  r.leg_home = ik.q;

  r.ready = JointVector::Zero(r.planning.dof());
  // elbow bent with the hand in front of the hip
  r.ready[r.planning.index_of("right_shoulder_pitch")] = -0.5;
  r.ready[r.planning.index_of("right_shoulder_roll")] = -0.15;
  r.ready[r.planning.index_of("right_elbow")] = -1.0;
  r.ready = r.planning.clamp(r.ready);

  r.arm = std::move(arm);
  r.leg = std::move(leg);
  return r;
}

Robot load_robot(const std::string& robots_dir, const RobotOptions& opt) {
  return make_robot(load_chain(robots_dir + "/humanoid_right_arm_waist.chain"),
                    load_chain(robots_dir + "/humanoid_left_leg.chain"), opt);
}

}  // namespace reach
