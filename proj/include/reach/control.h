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

#ifndef REACH_CONTROL_H_
#define REACH_CONTROL_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "reach/plant.h"
#include "reach/planner.h"
#include "reach/residual.h"
#include "reach/robot.h"
#include "reach/se3.h"

namespace reach {

struct GoalAdjustConfig {
  double alpha = 1.6;
  double start_thresh = 0.15;  // m
  double stop_thresh = 0.02;   // m

  void validate() const;  // throws ConfigError
};

// Scales the translation of `err` by alpha when its norm d satisfies
// stop_thresh < d <= start_thresh; returns it unchanged otherwise.
Pose adjust_goal(const Pose& err, const GoalAdjustConfig& cfg = {});

inline bool adjust_active(const Pose& err, const GoalAdjustConfig& cfg = {}) {
  double d = err.translation().norm();
  return d > cfg.stop_thresh && d <= cfg.start_thresh;
}

// Tracking executor standing in for the learned tracking policy: it follows
// the reference and adds a damped-least-squares correction that drives the
// estimated error toward the reference's own error.
struct ExecutorConfig {
  double gain = 0.1;  // per-tick integration gain
  double leak = 0.3;  // per-tick decay of the accumulated correction
  double damping = 0.05;
  double max_correction_m = 0.05;
  double max_correction_rad = 0.3;
};

// q_ref in planning layout; x_meas are the measured arm joints. Both errors
// are end-effector poses seen from the goal frame `goal`.
// Accumulated arm-space correction carried between ticks. Empty means zero.
struct ExecutorState {
  Eigen::VectorXd correction;
};

// One executor tick: decays the correction by `leak`, integrates the
// end-effector error difference through the damped Jacobian pseudo-inverse at
// x_meas into it and returns the clamped command q_ref + [0; correction].
JointVector executor_command(const Robot& robot, const JointVector& q_ref,
                             const JointVector& x_meas, const Pose& goal,
                             const Pose& err_estimate, const Pose& err_reference,
                             const ExecutorConfig& cfg, ExecutorState& state);

// kOracle reads the plant's true end-effector and base poses without noise.
enum class EstimatorKind { kAnalytical, kNeural, kMocap, kOracle };

const char* estimator_name(EstimatorKind kind);
EstimatorKind estimator_from_name(const std::string& name);

struct Estimators {
  EstimatorKind ee = EstimatorKind::kAnalytical;
  EstimatorKind odom = EstimatorKind::kAnalytical;
  const ResidualModel* ee_model = nullptr;
  const ResidualModel* odom_model = nullptr;
};

struct EpisodeConfig {
  int horizon = 1500;
  int replan_every = 300;
  bool replan = true;
  bool goal_adjust = true;
  bool grasp = true;
  double grasp_thresh = 0.015;  // m
  GoalAdjustConfig adjust;
  ExecutorConfig executor;
  PlannerConfig planner;
  std::vector<Box> obstacles;
  // Constant offset added to the arm command; used to diversify collected
  // data. Empty means none.
  Eigen::VectorXd command_offset;
};

// Everything recorded at one control tick, before the command is applied.
struct TickRecord {
  int t = 0;
  JointVector q_ref;
  JointVector q_cmd;
  JointVector q_meas;
  JointVector y_meas;
  Pose err_est;    // estimated residual error
  Pose err_true;   // residual error from plant truth
  Pose ee_est;     // pelvis frame
  Pose ee_true;    // pelvis frame
  Pose base_est;   // starting base pose in the current base frame, estimated
  Pose base_true;  // the same from plant truth
  bool replan = false;
  bool adjust = false;
  bool grasp_closed = false;
};

struct RolloutHeader {
  int episode = 0;
  Pose goal;  // starting base frame
  std::string config_name;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::uint64_t chain_hash = 0;
  std::uint64_t plant_hash = 0;
  std::string ee_estimator;
  std::string odom_estimator;
  bool replan = true;
  bool goal_adjust = true;
  bool grasp = true;
  int horizon = 0;
  int replan_every = 0;
  int arm_dof = 0;
};

struct RolloutLog {
  RolloutHeader header;
  std::vector<TickRecord> ticks;
  bool converged = false;  // true error under the grasp threshold at the end
  int replan_failures = 0;
};

using TickObserver = std::function<void(const PlantModel&, const PlantState&)>;

// Runs one reaching episode from q0 toward `goal` (a pose in the starting
// base frame). Throws IkInfeasible / PlanBlocked when the first plan fails;
// a failed replan keeps the current reference.
RolloutLog run_episode(const PlantModel& plant, const Estimators& est, const Pose& goal,
                       const JointVector& q0, const EpisodeConfig& cfg, int episode = 0,
                       const TickObserver& observer = nullptr);

std::string rollout_to_jsonl(const RolloutLog& log);
RolloutLog rollout_from_jsonl(const std::string& text);

}  // namespace reach

#endif  // REACH_CONTROL_H_
