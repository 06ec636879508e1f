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

#include "reach/retarget.h"

#include <cmath>

#include "gtest/gtest.h"
#include "reach/errors.h"
#include "test_util.h"

namespace reach {
namespace {

using testing::rodrigues;

GraspCandidate Grasp(const Pose& p, double conf) {
  GraspCandidate g;
  g.pose = p;
  g.confidence = conf;
  g.width = 0.05;
  return g;
}

SceneContext Table() {
  SceneContext ctx;
  ctx.table_height = 0.74;
  ctx.band_lo = 0.02;
  ctx.band_hi = 0.20;
  ctx.hand_side = HandSide::kRight;
  return ctx;
}

TEST(FilterGrasps, SingleCandidateKept) {
  GraspCandidate g = Grasp(Pose::FromTranslation(Vec3(0.3, 0, 0.80)), 0.5);
  auto out = filter_grasps({g}, Table());
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].pose.to_array(), g.pose.to_array());
}

TEST(FilterGrasps, ConfidenceBreaksTies) {
  GraspCandidate a = Grasp(Pose::FromTranslation(Vec3(0.3, 0, 0.80)), 0.7);
  GraspCandidate b = Grasp(Pose::FromTranslation(Vec3(0.3, 0.1, 0.80)), 0.9);
  auto out = filter_grasps({a, b}, Table());
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].confidence, 0.9);
  EXPECT_EQ(out[1].confidence, 0.7);
}

TEST(FilterGrasps, FlatterGraspFirst) {
  Pose tilted(Vec3(0.3, 0, 0.8), Mat3(rodrigues(Vec3::UnitY(), 0.5)));
  GraspCandidate a = Grasp(tilted, 0.99);
  GraspCandidate b = Grasp(Pose::FromTranslation(Vec3(0.3, 0, 0.8)), 0.1);
  auto out = filter_grasps({a, b}, Table());
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].confidence, 0.1);
}

TEST(FilterGrasps, HeightBand) {
  SceneContext ctx = Table();
  double below = ctx.table_height + ctx.band_lo - 0.05;
  GraspCandidate low = Grasp(Pose::FromTranslation(Vec3(0.3, 0, below)), 0.9);
  GraspCandidate ok = Grasp(Pose::FromTranslation(Vec3(0.3, 0, 0.8)), 0.2);
  auto out = filter_grasps({low, ok}, ctx);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].confidence, 0.2);
  EXPECT_THROW(filter_grasps({low}, ctx), NoFeasibleGrasp);
}

TEST(FilterGrasps, OppositeSideRemoved) {
  // approach axis heading toward -y reaches the object from its +y side,
  // which is the far side for a right hand
  Pose far_side(Vec3(0.3, 0, 0.8), Mat3(rodrigues(Vec3::UnitZ(), -kPi / 2)));
  GraspCandidate g = Grasp(far_side, 0.9);
  EXPECT_THROW(filter_grasps({g}, Table()), NoFeasibleGrasp);
  SceneContext left = Table();
  left.hand_side = HandSide::kLeft;
  EXPECT_EQ(filter_grasps({g}, left).size(), 1u);
}

double Yaw(const Pose& p) { return yaw_pitch_roll(p.rotation_matrix())[0]; }

TEST(Retarget, IdentityGivesPure45DegreeTurn) {
  Pose out = retarget_to_hand(Grasp(Pose::Identity(), 0.5));
  Mat3 expected = rodrigues(Vec3::UnitZ(), deg2rad(45.0));
  EXPECT_LT((out.rotation_matrix() - expected).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(out.translation(), Vec3::Zero());
}

TEST(Retarget, YawClippedAtSeventy) {
  Pose g(Vec3(0.3, 0, 0.8), Mat3(rodrigues(Vec3::UnitZ(), deg2rad(45.0))));
  RetargetResult r = retarget_to_hand_detailed(Grasp(g, 0.5));
  EXPECT_TRUE(r.clipped);
  EXPECT_NEAR(rad2deg(Yaw(r.pose)), 70.0, 1e-9);
  Pose neg(Vec3::Zero(), Mat3(rodrigues(Vec3::UnitZ(), deg2rad(-150.0))));
  EXPECT_NEAR(rad2deg(Yaw(retarget_to_hand(Grasp(neg, 0.5)))), -70.0, 1e-9);
}

TEST(Retarget, SmallYawPassesThrough) {
  Pose g(Vec3::Zero(), Mat3(rodrigues(Vec3::UnitZ(), deg2rad(10.0))));
  RetargetResult r = retarget_to_hand_detailed(Grasp(g, 0.5));
  EXPECT_FALSE(r.clipped);
  Mat3 oracle = rodrigues(Vec3::UnitZ(), deg2rad(10.0)) *
                rodrigues(Vec3::UnitZ(), deg2rad(45.0));
  EXPECT_LT((r.pose.rotation_matrix() - oracle).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(rad2deg(Yaw(r.pose)), 55.0, 1e-9);
}

TEST(Retarget, ClipKeepsPitchAndRoll) {
  Mat3 r0 = from_yaw_pitch_roll(deg2rad(60.0), 0.3, -0.2);
  RetargetResult r = retarget_to_hand_detailed(Grasp(Pose(Vec3::Zero(), r0), 0.5));
  Vec3 ypr = yaw_pitch_roll(r.pose.rotation_matrix());
  Vec3 unclipped = yaw_pitch_roll(Mat3(r0 * rodrigues(Vec3::UnitZ(), deg2rad(45.0))));
  EXPECT_NEAR(std::abs(rad2deg(ypr[0])), 70.0, 1e-9);
  EXPECT_NEAR(ypr[1], unclipped[1], 1e-12);
  EXPECT_NEAR(ypr[2], unclipped[2], 1e-12);
}

TEST(Retarget, OutputYawAlwaysWithinLimit) {
  std::mt19937_64 rng(41);
  for (int i = 0; i < 500; ++i) {
    RetargetResult r =
        retarget_to_hand_detailed(Grasp(testing::random_pose(rng), 0.5));
    if (r.gimbal_bypass) continue;
    EXPECT_LE(std::abs(rad2deg(Yaw(r.pose))), 70.0 + 1e-9);
  }
}

TEST(Retarget, GuardAgainstSecondApplication) {
  GraspCandidate once = retarget_candidate(Grasp(Pose::Identity(), 0.5));
  EXPECT_TRUE(once.retargeted);
  EXPECT_THROW(retarget_candidate(once), AlreadyRetargeted);
}

TEST(Retarget, BaseFrameOption) {
  Pose g(Vec3::Zero(), Mat3(rodrigues(Vec3::UnitX(), 0.4)));
  RetargetOptions opt;
  opt.frame = OffsetFrame::kBase;
  Pose out = retarget_to_hand(Grasp(g, 0.5), opt);
  Mat3 oracle = rodrigues(Vec3::UnitZ(), deg2rad(45.0)) * rodrigues(Vec3::UnitX(), 0.4);
  EXPECT_LT((out.rotation_matrix() - oracle).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(GraspIo, JsonlRoundTrip) {
  std::vector<GraspCandidate> gs = {
      Grasp(Pose::FromTranslation(Vec3(0.1, 0.2, 0.3)), 0.4),
      Grasp(Pose(Vec3(0, 0, 1), Mat3(rodrigues(Vec3::UnitZ(), 0.3))), 1.0)};
  auto back = grasps_from_jsonl(grasps_to_jsonl(gs));
  ASSERT_EQ(back.size(), 2u);
  for (int i = 0; i < 2; ++i) {
    EXPECT_EQ(back[i].pose.to_array(), gs[i].pose.to_array());
    EXPECT_EQ(back[i].confidence, gs[i].confidence);
  }
  EXPECT_THROW(grasps_from_jsonl("{\"pose\": [0,0,0,1,0,0,0], \"confidence\": 2, "
                                 "\"width\": 0.1}\n"),
               ParseError);
}

}  // namespace
}  // namespace reach
