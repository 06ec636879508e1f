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

#ifndef REACH_EXPERIMENT_H_
#define REACH_EXPERIMENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "reach/control.h"
#include "reach/dataset.h"
#include "reach/plant.h"
#include "reach/residual.h"
#include "reach/robot.h"

namespace reach {

// Reaching-goal distribution. Heights are above the ground; goals are
// returned in the standing pelvis frame at t = 0.
struct GoalSampling {
  std::string preset = "box";  // "box" or "tables"
  double x[2] = {0.1, 0.5};
  double y[2] = {-0.5, 0.5};
  double z[2] = {0.65, 1.15};
  double yaw_deg[2] = {-60.0, 60.0};
  std::vector<double> table_heights = {0.5, 0.74, 0.88};
  double table_band[2] = {0.05, 0.15};  // goal height above the table top
  int count = 60;                       // per table for "tables"
};

struct PlantSetup {
  bool calibrate = true;
  CalibrationTargets targets;
  int calibration_goals = 20;
  double mocap_noise_sigma = 2e-4;
  double sway_amplitude = 0.01;
  double sway_gain = 0.08;
  double lag = 0.2;
};

struct ExperimentConfig {
  std::string name = "default";
  std::uint64_t seed = 0;
  std::string robots_dir;  // absolute, or relative to the working directory
  GoalSampling goals;
  PlantSetup plant;
  CollectConfig collect;
  int collect_goals = 250;
  TrainConfig train;
  bool residual = true;  // false trains the direct-prediction variant
  EpisodeConfig episode;
  EstimatorKind ee_estimator = EstimatorKind::kNeural;
  EstimatorKind odom_estimator = EstimatorKind::kNeural;

  ExperimentConfig();
  // Throws ConfigError.
  void validate() const;
  // Canonical text; parse_experiment(to_text()) reproduces the config.
  std::string to_text() const;
  std::uint64_t hash() const;
};

// Parses the sectioned key-value format. Relative `robots` paths are resolved
// against `base_dir`. Throws ParseError or ConfigError.
ExperimentConfig parse_experiment(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig load_experiment(const std::string& path);

// Applies one "key=on|off" switch. Keys: neural_fk, neural_odom, goal_adjust,
// replan, grasp, residual. Throws ConfigError for anything else.
void apply_ablation(ExperimentConfig& cfg, const std::string& switch_text);

std::vector<Pose> sample_goals(const Robot& robot, const GoalSampling& g, std::uint64_t seed,
                               const PlannerConfig& planner = {});

// The plant for an experiment: the default error shape, scaled so analytical
// errors over a nominal collection sweep hit the targets when
// `setup.calibrate` is set.
PlantConfig make_plant_config(const Robot& robot, const PlantSetup& setup, std::uint64_t seed,
                              const GoalSampling& goals, CalibrationReport* report = nullptr);

Estimators estimators_for(const ExperimentConfig& cfg, const ResidualModel* ee_model,
                          const ResidualModel* odom_model);

// Goals for data collection and for tracking sweeps. Both are drawn from
// `cfg.goals` with the experiment seed; collection always uses the box preset.
std::vector<Pose> collection_goals(const Robot& robot, const ExperimentConfig& cfg);
std::vector<Pose> tracking_goals(const Robot& robot, const ExperimentConfig& cfg);

// Collects the experiment dataset on `plant`.
Dataset collect_for(const Robot& robot, const PlantModel& plant, const ExperimentConfig& cfg);

// Trains on the first two thirds of `d` and validates on the rest. Odometry
// pairs are redrawn every epoch.
ResidualModel train_end_effector(const Dataset& d, const ExperimentConfig& cfg);
ResidualModel train_odometry(const Robot& robot, const Dataset& d, const ExperimentConfig& cfg);

// Runs one episode per goal, episodes numbered from zero.
std::vector<RolloutLog> run_sweep(const PlantModel& plant, const Estimators& est,
                                  const std::vector<Pose>& goals, const EpisodeConfig& cfg,
                                  const std::string& config_name, std::uint64_t config_hash);

}  // namespace reach

#endif  // REACH_EXPERIMENT_H_
