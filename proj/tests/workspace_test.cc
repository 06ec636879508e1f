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

#include "reach/workspace.h"

#include <cmath>

#include "gtest/gtest.h"
#include "test_util.h"

namespace reach {
namespace {

using testing::data_path;

TEST(Workspace, FullyLockedChainReachesOneVoxel) {
  KinematicChain c = load_chain(data_path("robots/humanoid_right_arm_waist.chain"));
  std::vector<std::string> all;
  for (const auto& j : c.joints()) all.push_back(j.name);
  KinematicChain locked = c.with_locked(all, 0.0);
  Vec3 home = fk(locked, JointVector::Zero(locked.dof())).translation();
  const double res = 0.02;
  // bounds put the home point at the center of the middle voxel of 5^3
  Box b{home - Vec3::Constant(2.5 * res), home + Vec3::Constant(2.5 * res)};
  WorkspaceMap m = estimate_workspace(locked, b, res);
  EXPECT_EQ(m.count, 1);
  EXPECT_EQ(m.volume, res * res * res);
  EXPECT_EQ(m.reachable[m.index(2, 2, 2)], 1);
}

TEST(Workspace, PlanarAnnulusArea) {
  KinematicChain c = load_chain(data_path("robots/planar_2link.chain"));
  const double res = 0.02;
  Box b{Vec3(-0.52, -0.52, -0.01), Vec3(0.52, 0.52, 0.01)};
  WorkspaceMap m = estimate_workspace(c, b, res);
  ASSERT_EQ(m.dims[2], 1);
  double area = static_cast<double>(m.count) * res * res;
  double expected = kPi * (0.5 * 0.5 - 0.1 * 0.1);
  EXPECT_NEAR(area, expected, 0.15 * expected);
  EXPECT_DOUBLE_EQ(m.volume, static_cast<double>(m.count) * res * res * res);
}

TEST(Workspace, IndependentOfThreadCount) {
  KinematicChain c = load_chain(data_path("robots/planar_2link.chain"));
  Box b{Vec3(-0.52, -0.52, -0.01), Vec3(0.52, 0.52, 0.01)};
  WorkspaceConfig one;
  one.threads = 1;
  WorkspaceConfig four;
  four.threads = 4;
  EXPECT_EQ(estimate_workspace(c, b, 0.04, one).reachable,
            estimate_workspace(c, b, 0.04, four).reachable);
}

TEST(Workspace, TextRoundTripAndCsv) {
  KinematicChain c = load_chain(data_path("robots/planar_2link.chain"));
  Box b{Vec3(-0.52, -0.52, -0.01), Vec3(0.52, 0.52, 0.01)};
  WorkspaceMap m = estimate_workspace(c, b, 0.04);
  WorkspaceMap back = workspace_from_text(workspace_to_text(m));
  EXPECT_EQ(back.reachable, m.reachable);
  EXPECT_EQ(back.count, m.count);
  EXPECT_EQ(back.dims, m.dims);
  std::string row = workspace_csv_row("planar", m);
  EXPECT_EQ(row.rfind("planar," + std::to_string(m.count) + ",", 0), 0u);
}

}  // namespace
}  // namespace reach
