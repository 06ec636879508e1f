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

#ifndef REACH_RESIDUAL_H_
#define REACH_RESIDUAL_H_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "reach/chain.h"
#include "reach/mlp.h"
#include "reach/se3.h"

namespace reach {

enum class ModelRole { kEndEffector, kOdometry };

const char* role_name(ModelRole role);
ModelRole role_from_name(const std::string& name);

// Translation followed by the 6D rotation: 9 numbers.
Eigen::Matrix<double, 9, 1> encode_pose(const Pose& p);
// Gram-Schmidt decode; throws DegenerateRot6D.
Pose decode_pose(const Eigen::Ref<const Eigen::VectorXd>& v);

// [x (10), FK(x) translation (3), FK(x) rot6d (6)]
Eigen::VectorXd fk_features(const JointVector& x, const Pose& fk_pose);
// [y_t (6), y_0 (6), O(y_t, y_0) translation (3), rot6d (6)]
Eigen::VectorXd odometry_features(const JointVector& y_t, const JointVector& y_0,
                                  const Pose& odom);

struct TrainConfig {
  double lr = 1e-4;
  double weight_decay = 1e-2;
  int batch = 256;
  int epochs = 50;
  int width = 256;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  std::uint64_t hash() const;
};

struct EpochStats {
  int epoch = 0;  // 0 is the untrained model
  double train_loss = 0.0;
  double val_loss = 0.0;
};

// A learned pose estimator. In residual form the network output is a
// correction composed onto the analytical pose; in direct form it is the pose
// itself. Outputs are trained in units normalized per head.
struct ResidualModel {
  ModelRole role = ModelRole::kEndEffector;
  bool residual = true;
  Mlp net;
  Eigen::VectorXd in_mean;
  Eigen::VectorXd in_scale;
  Eigen::Matrix<double, 9, 1> out_offset;
  Eigen::Matrix<double, 9, 1> out_scale;
  TrainConfig train_config;
  std::uint64_t dataset_hash = 0;
  std::vector<EpochStats> curves;

  // Untrained model whose prediction is the identity correction (residual
  // form) or the zero-translation identity pose (direct form).
  static ResidualModel Zero(ModelRole role, bool residual, int width = 256,
                            std::uint64_t seed = 0);

  int inputs() const { return net.shape().inputs; }
  // Network output mapped back to pose units.
  Pose predict(const Eigen::VectorXd& features) const;
  std::vector<Pose> predict_batch(const Eigen::MatrixXd& features) const;
};

// FK(x) (+) eta(x, FK(x)); for a direct model, the predicted pose.
Pose corrected_fk(const ResidualModel& model, const KinematicChain& arm, const JointVector& x);

// FK(y_0) (-) FK(y_t): the starting base pose seen from the current base.
Pose analytical_odometry(const KinematicChain& leg, const JointVector& y_t,
                         const JointVector& y_0);

Pose corrected_odometry(const ResidualModel& model, const KinematicChain& leg,
                        const JointVector& y_t, const JointVector& y_0);

// The goal, fixed in the starting base frame, moved into the current base
// frame by `odometry`; then ee (-) goal.
Pose residual_error(const Pose& ee_estimate, const Pose& odometry, const Pose& goal);

// Training sets hold features (inputs x n) and target poses already encoded
// as 9-vectors (9 x n): the correction for residual models, the pose itself
// for direct ones.
struct TrainingSet {
  Eigen::MatrixXd features;
  Eigen::MatrixXd labels;
  int size() const { return static_cast<int>(features.cols()); }
};

// Called at the start of every epoch (1-based) to redraw the training set;
// returns false to keep the current one.
using EpochSampler = std::function<bool(int epoch, TrainingSet& train)>;

// AdamW on MSE(translation) + MSE(rot6d). The model's normalization is fitted
// on `train`. On a non-finite loss the parameters of the last finished epoch
// are restored and NonFiniteLoss is thrown.
void train_model(ResidualModel& model, TrainingSet train, const TrainingSet& val,
                 const TrainConfig& cfg, const EpochSampler& sampler = nullptr);

// Loss of the current model on a set, in the normalized training units.
double evaluate_loss(const ResidualModel& model, const TrainingSet& set);

std::string model_to_json(const ResidualModel& model);
// Throws HashMismatch when the stored architecture hash disagrees with the
// stored shape, ParseError on malformed input.
ResidualModel model_from_json(const std::string& text);

void save_model(const ResidualModel& model, const std::string& path);
ResidualModel load_model(const std::string& path);

}  // namespace reach

#endif  // REACH_RESIDUAL_H_
