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

#ifndef REACH_IK_H_
#define REACH_IK_H_

#include <vector>

#include "reach/chain.h"
#include "reach/se3.h"

namespace reach {

struct IkConfig {
  double damping = 0.05;
  int max_iterations = 200;
  double pos_tol = 1e-3;      // meters
  double rot_tol_deg = 0.5;   // degrees
  bool position_only = false;
  double max_step = 0.3;      // largest joint update per iteration
  // Stop a run early when the residual has not improved by `stall_eps` over
  // `stall_window` iterations. 0 disables.
  int stall_window = 20;
  double stall_eps = 1e-7;
  // Extra runs from spread_seeds() when the first run does not converge.
  int restarts = 8;
};

struct IkResult {
  JointVector q;
  PoseError residual;
  bool converged = false;
  int iterations = 0;
  bool hit_max_iterations = false;
};

// Damped least squares: q <- clamp(q + J^T (J J^T + lambda^2 I)^-1 e). Locked
// joints (lo == hi) get a zero Jacobian column. Returns the best iterate seen
// whether or not it converged.
// Deterministic joint configurations spread over the limit box; the first
// one is the zero configuration clamped into the limits.
std::vector<JointVector> spread_seeds(const KinematicChain& chain, int count);

IkResult solve_ik(const KinematicChain& chain, const Pose& target,
                  const JointVector& seed, const IkConfig& cfg = {});

}  // namespace reach

#endif  // REACH_IK_H_
