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

#ifndef REACH_SCORING_H_
#define REACH_SCORING_H_

#include <string>
#include <utility>
#include <vector>

#include "reach/control.h"

namespace reach {

struct RewardWeights {
  double ee_exp = 2.0;
  double upper_dof_exp = 4.0;
  double base_height_exp = 4.0;
  double position_limits = -5.0;
  double velocity_limits = -5.0;
  double ee_linear_velocity = -0.2;
  double ee_angular_velocity = -0.02;
  double dof_acceleration = -2.5e-7;
  double dof_velocity = -1e-3;
  double action_rate = -0.1;
  double base_velocity = -2.0;
  double base_angular_velocity = -0.05;
  double velocity_limit = 2.0;  // rad/s or m/s, any joint
  double dt = 0.02;
};

struct RewardTerm {
  std::string name;
  double weight = 0.0;
  bool available = false;
  double sum = 0.0;       // unweighted, over ticks
  double weighted = 0.0;  // weight * sum
};

struct RewardBreakdown {
  std::vector<RewardTerm> terms;
  double total = 0.0;  // sum of the available weighted terms

  const RewardTerm& term(const std::string& name) const;  // throws Error
};

RewardBreakdown score_rollout(const RolloutLog& log, const RewardWeights& weights = {},
                              const KinematicChain* planning = nullptr);

struct CdfRow {
  int percentile = 0;
  double trans_cm = 0.0;
  double rot_deg = 0.0;
};

struct Metrics {
  int n = 0;
  double trans_mean_cm = 0.0;
  double trans_std_cm = 0.0;  // population
  double rot_mean_deg = 0.0;
  double rot_std_deg = 0.0;
  double joint_err_rad = 0.0;
  std::vector<CdfRow> cdf;  // percentiles 0..100
};

// Aggregates final-tick true errors. Throws Error on an empty list.
Metrics compute_metrics(const std::vector<RolloutLog>& logs);

std::string metrics_csv(const std::vector<std::pair<std::string, Metrics>>& rows);
std::string cdf_csv(const Metrics& m);

}  // namespace reach

#endif  // REACH_SCORING_H_
