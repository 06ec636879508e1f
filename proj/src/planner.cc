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

#include "reach/planner.h"

#include <algorithm>
#include <cmath>

#include "reach/errors.h"

namespace reach {
namespace {

double quintic(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }

int probe_joint(const KinematicChain& chain) { return chain.dof() * 2 / 3; }

bool blocked(const KinematicChain& chain, const JointVector& q,
             const std::vector<Box>& obstacles) {
  if (obstacles.empty()) return false;
  ChainFrames fr = chain_frames(chain, q);
  const Vec3& ee = fr.ee.translation();
  const Vec3& mid = fr.origin[probe_joint(chain)];
  for (const Box& b : obstacles) {
    if (b.contains(ee) || b.contains(mid)) return true;
  }
  return false;
}

// Appends the quintic segment from `from` to `to`, excluding `from`.
void append_segment(const KinematicChain& chain, const JointVector& from,
                    const JointVector& to, const PlannerConfig& cfg,
                    ReferenceTrajectory& out) {
  const double delta = (to - from).cwiseAbs().maxCoeff();
  const int steps =
      static_cast<int>(std::ceil(delta * 1.875 / (cfg.max_velocity * cfg.dt) - 1e-12));
  for (int k = 1; k <= steps; ++k) {
    JointVector q = from + quintic(static_cast<double>(k) / steps) * (to - from);
    out.waypoints.push_back(q);
    out.ee_refs.push_back(fk(chain, q));
  }
}

bool segment_clear(const KinematicChain& chain, const JointVector& from,
                   const JointVector& to, const std::vector<Box>& obstacles,
                   const PlannerConfig& cfg) {
  if (obstacles.empty()) return true;
  const double delta = (to - from).cwiseAbs().maxCoeff();
  const int steps = std::max(
      1, static_cast<int>(std::ceil(delta * 1.875 / (cfg.max_velocity * cfg.dt))) *
             (cfg.collision_substeps + 1));
  for (int k = 0; k <= steps; ++k) {
    JointVector q = from + quintic(static_cast<double>(k) / steps) * (to - from);
    if (blocked(chain, q, obstacles)) return false;
  }
  return true;
}

}  // namespace

ReferenceTrajectory plan(const KinematicChain& chain, const JointVector& q_now,
                         const Pose& goal, const std::vector<Box>& obstacles,
                         const PlannerConfig& cfg) {
  if (q_now.size() != chain.dof()) throw Error("planner start vector has wrong size");
  if (!(cfg.max_velocity > 0.0) || !(cfg.dt > 0.0)) {
    throw ConfigError("planner velocity limit and dt must be positive");
  }
  const JointVector start = chain.clamp(q_now);
  IkResult ik = solve_ik(chain, goal, start, cfg.ik);
  if (!ik.converged) {
    throw IkInfeasible("no IK solution within tolerance (residual " +
                       std::to_string(ik.residual.trans_err) + " m, " +
                       std::to_string(ik.residual.rot_err) + " deg)");
  }
  ReferenceTrajectory out;
  out.target = ik.q;
  if (blocked(chain, ik.q, obstacles)) throw PlanBlocked("goal configuration is inside an obstacle");

  if (segment_clear(chain, start, ik.q, obstacles, cfg)) {
    append_segment(chain, start, ik.q, cfg, out);
  } else {
    const Pose from = fk(chain, start);
    const Vec3 mid = 0.5 * (from.translation() + goal.translation());
    const Vec3 offsets[] = {Vec3(0, 0, cfg.detour_offset), Vec3(0, cfg.detour_offset, 0),
                            Vec3(0, -cfg.detour_offset, 0),
                            Vec3(0, 0, 2.0 * cfg.detour_offset)};
    IkConfig via_cfg = cfg.ik;
    via_cfg.position_only = true;
    bool found = false;
    for (const Vec3& off : offsets) {
      Pose via_pose(mid + off, goal.rotation());
      IkResult via = solve_ik(chain, via_pose, start, via_cfg);
      if (!via.converged) continue;
      if (!segment_clear(chain, start, via.q, obstacles, cfg) ||
          !segment_clear(chain, via.q, ik.q, obstacles, cfg)) {
        continue;
      }
      append_segment(chain, start, via.q, cfg, out);
      append_segment(chain, via.q, ik.q, cfg, out);
      found = true;
      break;
    }
    if (!found) throw PlanBlocked("no collision-free detour found");
  }
  if (out.waypoints.empty()) {
    out.waypoints.push_back(start);
    out.ee_refs.push_back(fk(chain, start));
  }
  return out;
}

double max_waypoint_step(const ReferenceTrajectory& traj, const JointVector& start) {
  double m = 0.0;
  JointVector prev = start;
  for (const auto& q : traj.waypoints) {
    m = std::max(m, (q - prev).cwiseAbs().maxCoeff());
    prev = q;
  }
  return m;
}

int count_penetrations(const KinematicChain& chain, const ReferenceTrajectory& traj,
                       const std::vector<Box>& obstacles) {
  int n = 0;
  for (const auto& q : traj.waypoints) n += blocked(chain, q, obstacles) ? 1 : 0;
  return n;
}

}  // namespace reach
