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

#ifndef REACH_PLANNER_H_
#define REACH_PLANNER_H_

#include <vector>

#include "reach/chain.h"
#include "reach/ik.h"
#include "reach/se3.h"
#include "reach/workspace.h"

namespace reach {

// Joint waypoints at the control rate and the end-effector pose of each.
struct ReferenceTrajectory {
  std::vector<JointVector> waypoints;
  std::vector<Pose> ee_refs;
  JointVector target;  // IK solution at the goal

  int horizon() const { return static_cast<int>(waypoints.size()); }
};

struct PlannerConfig {
  IkConfig ik;
  double max_velocity = 1.0;  // rad/s or m/s per joint
  double dt = 0.02;
  double detour_offset = 0.15;  // m, via-point displacement
  int collision_substeps = 4;   // extra checks between waypoints
};

// IK to the goal, seeded at q_now, then a quintic time-scaled joint motion.
// The end-effector and the point at joint dof*2/3 must stay outside every
// obstacle box; otherwise via points above and to either side are tried.
// Throws IkInfeasible or PlanBlocked.
ReferenceTrajectory plan(const KinematicChain& chain, const JointVector& q_now,
                         const Pose& goal, const std::vector<Box>& obstacles,
                         const PlannerConfig& cfg = {});

// Largest per-joint step between consecutive waypoints, including the step
// from `start` to the first waypoint.
double max_waypoint_step(const ReferenceTrajectory& traj, const JointVector& start);

// Number of sampled configurations whose check points lie inside an obstacle.
int count_penetrations(const KinematicChain& chain, const ReferenceTrajectory& traj,
                       const std::vector<Box>& obstacles);

}  // namespace reach

#endif  // REACH_PLANNER_H_
