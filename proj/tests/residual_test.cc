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

#include "reach/residual.h"

#include <cmath>
#include <random>

#include <json.hpp>

#include "gtest/gtest.h"
#include "reach/errors.h"
#include "test_util.h"

namespace reach {
namespace {

using testing::as_matrix;
using testing::data_path;
using testing::random_pose;

KinematicChain Arm() { return load_chain(data_path("robots/humanoid_right_arm_waist.chain")); }

TEST(Residual, EncodeDecodeRoundTrip) {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    Pose p = random_pose(rng);
    EXPECT_LT((as_matrix(decode_pose(encode_pose(p))) - as_matrix(p)).norm(), 1e-12);
  }
}

TEST(Residual, ErrorMatchesMatrixOracle) {
  std::mt19937_64 rng(2);
  for (int i = 0; i < 100; ++i) {
    Pose ee = random_pose(rng), odom = random_pose(rng), goal = random_pose(rng);
    Eigen::Matrix4d current_goal = as_matrix(odom) * as_matrix(goal);
    Eigen::Matrix4d expect = current_goal.inverse() * as_matrix(ee);
    EXPECT_LT((as_matrix(residual_error(ee, odom, goal)) - expect).norm(), 1e-10);
  }
}

TEST(Residual, UntrainedResidualModelIsAnalytical) {
  KinematicChain arm = Arm();
  ResidualModel m = ResidualModel::Zero(ModelRole::kEndEffector, true, 16, 3);
  std::mt19937_64 rng(3);
  JointVector x = testing::random_within(arm, rng);
  EXPECT_LT((as_matrix(corrected_fk(m, arm, x)) - as_matrix(fk(arm, x))).norm(), 1e-12);
}

TEST(Residual, AnalyticalOdometryIsRelativeLegPose) {
  KinematicChain leg = load_chain(data_path("robots/humanoid_left_leg.chain"));
  std::mt19937_64 rng(4);
  JointVector y0 = testing::random_within(leg, rng), yt = testing::random_within(leg, rng);
  Eigen::Matrix4d expect = as_matrix(fk(leg, yt)).inverse() * as_matrix(fk(leg, y0));
  EXPECT_LT((as_matrix(analytical_odometry(leg, yt, y0)) - expect).norm(), 1e-12);
}

// Synthetic residual: a fixed offset that depends smoothly on the first joint.
TrainingSet Synthetic(const KinematicChain& arm, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  TrainingSet s;
  s.features.resize(19, n);
  s.labels.resize(9, n);
  for (int i = 0; i < n; ++i) {
    JointVector x = testing::random_within(arm, rng);
    s.features.col(i) = fk_features(x, fk(arm, x));
    Pose d(Vec3(0.01 * std::sin(x[0]), 0.005, -0.01 * std::cos(x[3])), Quat::Identity());
    s.labels.col(i) = encode_pose(d);
  }
  return s;
}

TEST(Residual, TrainingReducesValidationLoss) {
  KinematicChain arm = Arm();
  ResidualModel m = ResidualModel::Zero(ModelRole::kEndEffector, true, 32, 5);
  TrainConfig cfg;
  cfg.width = 32;
  cfg.epochs = 20;
  cfg.lr = 3e-3;
  cfg.batch = 64;
  cfg.seed = 5;
  train_model(m, Synthetic(arm, 1500, 6), Synthetic(arm, 500, 7), cfg);
  ASSERT_EQ(m.curves.size(), 21u);
  EXPECT_EQ(m.curves.front().epoch, 0);
  EXPECT_LT(m.curves.back().val_loss, 0.2 * m.curves.front().val_loss);
}

TEST(Residual, TrainingIsDeterministic) {
  KinematicChain arm = Arm();
  TrainConfig cfg;
  cfg.width = 16;
  cfg.epochs = 3;
  cfg.seed = 8;
  ResidualModel a = ResidualModel::Zero(ModelRole::kEndEffector, true, 16, 8);
  ResidualModel b = a;
  train_model(a, Synthetic(arm, 400, 9), Synthetic(arm, 100, 10), cfg);
  train_model(b, Synthetic(arm, 400, 9), Synthetic(arm, 100, 10), cfg);
  EXPECT_EQ(a.net.params(), b.net.params());
}

TEST(Residual, DivergentTrainingRaisesAndRestores) {
  KinematicChain arm = Arm();
  TrainConfig cfg;
  cfg.width = 16;
  cfg.epochs = 50;
  cfg.lr = 1e150;
  ResidualModel m = ResidualModel::Zero(ModelRole::kEndEffector, true, 16, 1);
  EXPECT_THROW(train_model(m, Synthetic(arm, 200, 1), Synthetic(arm, 50, 2), cfg), NonFiniteLoss);
  EXPECT_TRUE(m.net.params().allFinite());
}

TEST(Residual, CheckpointRoundTripIsExact) {
  KinematicChain arm = Arm();
  TrainConfig cfg;
  cfg.width = 16;
  cfg.epochs = 2;
  ResidualModel m = ResidualModel::Zero(ModelRole::kEndEffector, false, 16, 2);
  train_model(m, Synthetic(arm, 300, 3), Synthetic(arm, 100, 4), cfg);
  ResidualModel back = model_from_json(model_to_json(m));
  EXPECT_EQ(back.residual, m.residual);
  EXPECT_EQ(back.role, m.role);
  TrainingSet probe = Synthetic(arm, 20, 5);
  for (int i = 0; i < probe.size(); ++i) {
    EXPECT_EQ(back.predict(probe.features.col(i)).to_array(),
              m.predict(probe.features.col(i)).to_array());
  }
}

TEST(Residual, CheckpointWithWrongArchitectureHashIsRejected) {
  ResidualModel m = ResidualModel::Zero(ModelRole::kOdometry, true, 8, 2);
  nlohmann::json j = nlohmann::json::parse(model_to_json(m));
  j["architecture_hash"] = "0000000000000001";
  EXPECT_THROW(model_from_json(j.dump()), HashMismatch);
}

TEST(Residual, RoleNamesRoundTrip) {
  for (ModelRole r : {ModelRole::kEndEffector, ModelRole::kOdometry}) {
    EXPECT_EQ(role_from_name(role_name(r)), r);
  }
  EXPECT_THROW(role_from_name("arm"), ConfigError);
}

}  // namespace
}  // namespace reach
