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

#include "reach/plant.h"

#include <cmath>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "reach/errors.h"
#include "test_util.h"

namespace reach {
namespace {

using testing::as_matrix;
using testing::chain_matrix;
using testing::data_path;

const Robot& TheRobot() {
  static const Robot robot = load_robot(data_path("robots"));
  return robot;
}

TEST(Robot, PlanningChainIsArmBehindHeightJoint) {
  const Robot& r = TheRobot();
  ASSERT_EQ(r.arm_dof(), 10);
  ASSERT_EQ(r.planning_dof(), 11);
  std::mt19937_64 rng(3);
  for (int i = 0; i < 20; ++i) {
    JointVector q = testing::random_within(r.planning, rng);
    Eigen::Matrix4d expect = as_matrix(Pose::FromTranslation(Vec3(0, 0, q[0]))) *
                             chain_matrix(r.arm, q.tail(10));
    EXPECT_LT((as_matrix(fk(r.planning, q)) - expect).norm(), 1e-12);
  }
}

TEST(Robot, LegHomeHoldsNominalPelvis) {
  const Robot& r = TheRobot();
  Pose pelvis = r.ankle_world * fk(r.leg, r.leg_home);
  EXPECT_NEAR(pelvis.translation().z(), r.pelvis_height, 1e-6);
  EXPECT_LT((pelvis.translation() - r.standing_pelvis(0.0).translation()).norm(), 1e-6);
  EXPECT_TRUE(r.planning.within_limits(r.ready));
}

TEST(Plant, IdealPlantFollowsCommandExactly) {
  const Robot& r = TheRobot();
  PlantModel m(r, PlantConfig::Ideal(r));
  PlantState s = plant_reset(m, r.ready);
  JointVector cmd = r.ready;
  cmd[0] = -0.1;
  cmd[4] -= 0.3;
  s = plant_step(m, s, cmd);
  EXPECT_LT((s.q_measured - cmd).norm(), 1e-12);
  EXPECT_LT((s.q_true - cmd).norm(), 1e-12);
  EXPECT_LT((as_matrix(s.ee_true) - chain_matrix(r.arm, cmd.tail(10))).norm(), 1e-12);
  EXPECT_NEAR(s.base_true.translation().z(), r.pelvis_height - 0.1, 1e-9);
  MocapReading mo = mocap_read(m, s);
  EXPECT_LT((mo.ee.translation() - s.ee_true.translation()).norm(), 1e-12);
}

TEST(Plant, LagAndJointErrorsFollowTheirFormulas) {
  const Robot& r = TheRobot();
  PlantConfig cfg = PlantConfig::DefaultShape(r);
  PlantModel m(r, cfg);
  PlantState s0 = plant_reset(m, r.ready);
  JointVector cmd = r.ready;
  cmd[5] += 0.2;
  PlantState s1 = plant_step(m, s0, cmd);
  JointVector expect = s0.q_measured + cfg.lag * (cmd - s0.q_measured);
  EXPECT_LT((s1.q_measured - expect).norm(), 1e-12);

  JointVector x = s1.q_measured.tail(10);
  JointVector xt = x + cfg.arm.bias + cfg.arm.elasticity.cwiseProduct(gravity_load(r.arm, x));
  EXPECT_LT((s1.q_true.tail(10) - xt).norm(), 1e-12);

  // Oracle for the perturbed chain: scale every origin translation by hand.
  KinematicChain scaled = r.arm;
  std::vector<Joint> joints = r.arm.joints();
  for (int i = 0; i < 10; ++i) {
    joints[i].origin = Pose(joints[i].origin.translation() * cfg.arm.link_scale[i],
                            joints[i].origin.rotation());
  }
  Pose ee = r.arm.ee_offset();
  ee = Pose(ee.translation() * cfg.arm.link_scale[10], ee.rotation());
  KinematicChain manual(r.arm.name(), joints, ee);
  EXPECT_LT((as_matrix(s1.ee_true) - chain_matrix(manual, xt)).norm(), 1e-12);

  double analytical_gap = (fk(r.arm, x).translation() - s1.ee_true.translation()).norm();
  EXPECT_GT(analytical_gap, 1e-3);
}

TEST(Plant, DeterministicAndEpisodeKeyedNoise) {
  const Robot& r = TheRobot();
  PlantConfig cfg = PlantConfig::DefaultShape(r);
  cfg.seed = 11;
  PlantModel m(r, cfg);
  JointVector cmd = r.ready;
  cmd[4] -= 0.2;
  PlantState a = plant_reset(m, r.ready, 0), b = plant_reset(m, r.ready, 0);
  PlantState c = plant_reset(m, r.ready, 1);
  for (int t = 0; t < 50; ++t) {
    a = plant_step(m, a, cmd);
    b = plant_step(m, b, cmd);
    c = plant_step(m, c, cmd);
  }
  EXPECT_EQ(a.q_true, b.q_true);
  EXPECT_EQ(a.base_true.to_array(), b.base_true.to_array());
  EXPECT_EQ(mocap_read(m, a).ee.to_array(), mocap_read(m, b).ee.to_array());
  EXPECT_EQ(a.ee_true.to_array(), c.ee_true.to_array());
  EXPECT_NE(mocap_read(m, a).ee.to_array(), mocap_read(m, c).ee.to_array());
}

TEST(Plant, MocapNoiseHasConfiguredSpread) {
  const Robot& r = TheRobot();
  PlantConfig cfg = PlantConfig::Ideal(r);
  cfg.mocap_noise_sigma = 1e-3;
  PlantModel m(r, cfg);
  PlantState s = plant_reset(m, r.ready);
  double sum = 0.0, sq = 0.0;
  const int n = 3000;
  for (int t = 0; t < n; ++t) {
    s = plant_step(m, s, r.ready);
    double d = mocap_read(m, s).ee.translation().x() - s.ee_true.translation().x();
    sum += d;
    sq += d * d;
  }
  double mean = sum / n;
  double sd = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(mean, 0.0, 1e-4);
  EXPECT_NEAR(sd, 1e-3, 1e-4);
}

TEST(Plant, RejectsOutOfLimitCommand) {
  const Robot& r = TheRobot();
  PlantModel m(r, PlantConfig::Ideal(r));
  PlantState s = plant_reset(m, r.ready);
  JointVector cmd = r.ready;
  cmd[0] = 0.05;
  EXPECT_THROW(plant_step(m, s, cmd), LimitViolation);
}

TEST(Plant, ValidateRejectsBadConfig) {
  const Robot& r = TheRobot();
  PlantConfig cfg = PlantConfig::Ideal(r);
  cfg.lag = 0.0;
  EXPECT_THROW(cfg.validate(r), ConfigError);
  cfg = PlantConfig::Ideal(r);
  cfg.arm.bias.resize(3);
  EXPECT_THROW(cfg.validate(r), ConfigError);
}

TEST(Plant, CalibrationHitsTargets) {
  const Robot& r = TheRobot();
  std::mt19937_64 rng(5);
  std::vector<CalibrationSample> samples;
  for (int e = 0; e < 4; ++e) {
    for (int k = 0; k < 25; ++k) {
      JointVector q = r.ready;
      std::uniform_real_distribution<double> u(-0.4, 0.4), uh(-0.15, 0.0);
      for (int i = 4; i < 11; ++i) q[i] = r.planning.clamp(q)[i] + u(rng);
      q[0] = k == 0 ? 0.0 : uh(rng);
      q = r.planning.clamp(q);
      Pose shift = Pose::FromTranslation(Vec3(0.01 * u(rng), 0.01 * u(rng), 0.0));
      samples.push_back({q.tail(10), compose(r.standing_pelvis(q[0]), shift), e});
    }
  }
  CalibrationTargets targets;
  CalibrationReport rep;
  PlantConfig cal = calibrate_plant(r, PlantConfig::DefaultShape(r), samples, targets, &rep);
  CalibrationReport check = analytical_errors(r, cal, samples);
  EXPECT_NEAR(check.ee_mean, targets.ee_mean, 2e-4);
  EXPECT_NEAR(check.odom_mean, targets.odom_mean, 2e-4);
  EXPECT_GT(rep.arm_scale, 0.0);
  EXPECT_GT(rep.leg_scale, 0.0);
}

}  // namespace
}  // namespace reach
