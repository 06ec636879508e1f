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

#ifndef REACH_PLANT_H_
#define REACH_PLANT_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "reach/chain.h"
#include "reach/robot.h"
#include "reach/se3.h"

namespace reach {

// Systematic error terms of one chain. The encoder reads q; the joint sits at
// q + bias + elasticity .* gravity_load(q); links are scaled by link_scale.
struct JointErrors {
  Eigen::VectorXd bias;        // rad
  Eigen::VectorXd elasticity;  // rad per unit load
  Eigen::VectorXd link_scale;  // dof + 1 entries, last one scales the ee offset

  static JointErrors Zero(int dof);
  JointErrors scaled(double s) const;  // bias, elasticity and (scale - 1) times s
  Eigen::VectorXd true_angles(const KinematicChain& chain, const Eigen::VectorXd& q) const;
};

struct PlantConfig {
  JointErrors arm;
  JointErrors leg;
  double mocap_noise_sigma = 2e-4;  // m
  double mocap_rot_sigma = 1e-3;    // rad
  double sway_amplitude = 0.01;     // m
  double sway_period = 16.0;        // s
  double sway_gain = 0.08;          // pelvis shift per meter of hand extension
  double sway_time_constant = 0.5;  // s
  double sway_tilt = 0.5;           // pelvis tilt, rad per meter of shift
  double lag = 0.2;
  double dt = 0.02;
  std::uint64_t seed = 0;

  // Throws ConfigError.
  void validate(const Robot& robot) const;
  std::uint64_t hash() const;

  // No systematic error, no sway, no noise, lag 1.
  static PlantConfig Ideal(const Robot& robot);
  // The error pattern before calibration; magnitudes are arbitrary.
  static PlantConfig DefaultShape(const Robot& robot);
};

struct PlantState {
  int t = 0;
  int episode = 0;  // selects the mocap noise stream
  JointVector q_commanded;  // planning layout [h, arm...]
  JointVector q_measured;
  JointVector q_true;
  JointVector y_measured;  // leg
  JointVector y_true;
  Pose ee_true;    // pelvis frame
  Pose base_true;  // world
  Eigen::Vector2d sway = Eigen::Vector2d::Zero();  // filtered pelvis shift
};

// JSON form of a plant configuration, embedding the robot hash. Loading
// against a different robot throws HashMismatch.
std::string plant_config_to_json(const Robot& robot, const PlantConfig& cfg);
PlantConfig plant_config_from_json(const Robot& robot, const std::string& text);

// A configured plant: the nominal robot plus its perturbed ("true") chains.
struct PlantModel {
  PlantModel(const Robot& robot, PlantConfig cfg);

  const Robot* robot;
  PlantConfig cfg;
  KinematicChain arm_true;
  KinematicChain leg_true;
  Vec3 hanging_ee;  // nominal ee position with the arm at zero
};

PlantState plant_reset(const PlantModel& model, const JointVector& q0, int episode = 0);

// Throws LimitViolation when cmd is outside the planning-chain limits.
PlantState plant_step(const PlantModel& model, const PlantState& state,
                      const JointVector& cmd);

struct MocapReading {
  Pose ee;    // pelvis frame
  Pose base;  // world
};

MocapReading mocap_read(const PlantModel& model, const PlantState& state);

// Stateful convenience wrapper; single-threaded.
class Plant {
 public:
  Plant(const Robot& robot, PlantConfig cfg, const JointVector& q0);

  const PlantState& state() const { return state_; }
  const PlantState& step(const JointVector& cmd);
  MocapReading mocap() const { return mocap_read(model_, state_); }
  const PlantModel& model() const { return model_; }
  void reset(const JointVector& q0, int episode = 0) { state_ = plant_reset(model_, q0, episode); }

 private:
  PlantModel model_;
  PlantState state_;
};

// One recorded operating point of a nominal run, used for calibration.
struct CalibrationSample {
  JointVector arm;  // encoder reading
  Pose pelvis;      // world pelvis pose
  int episode = 0;
};

struct CalibrationTargets {
  double ee_mean = 0.0176;    // m, mean analytical ee error
  double odom_mean = 0.0110;  // m, mean analytical odometry error
};

struct CalibrationReport {
  double arm_scale = 0.0;
  double leg_scale = 0.0;
  double ee_mean = 0.0;
  double odom_mean = 0.0;
};

// Mean analytical errors of `cfg` over the samples. Odometry pairs each
// sample with the first sample of its episode.
CalibrationReport analytical_errors(const Robot& robot, const PlantConfig& cfg,
                                    std::span<const CalibrationSample> samples);

// Scales the arm and leg error terms of `shape` so the mean analytical
// errors over `samples` hit the targets.
PlantConfig calibrate_plant(const Robot& robot, const PlantConfig& shape,
                            std::span<const CalibrationSample> samples,
                            const CalibrationTargets& targets = {},
                            CalibrationReport* report = nullptr);

}  // namespace reach

#endif  // REACH_PLANT_H_
