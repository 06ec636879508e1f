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

// Grasp candidate selection and parallel-jaw to dexterous-hand retargeting.
// Grasp frames follow the common parallel-jaw convention: x is the approach
// direction, y the jaw-closing direction.

#ifndef REACH_RETARGET_H_
#define REACH_RETARGET_H_

#include <string>
#include <vector>

#include "reach/se3.h"

namespace reach {

struct GraspCandidate {
  Pose pose;  // robot base frame
  double confidence = 0.0;
  double width = 0.0;
  // Set once the pose has been mapped to the hand; retargeting again would
  // stack a second 45 degree offset.
  bool retargeted = false;
};

enum class HandSide { kLeft, kRight };

struct SceneContext {
  double table_height = 0.0;
  // Allowed grasp height above the table top, meters.
  double band_lo = 0.0;
  double band_hi = 0.0;
  HandSide hand_side = HandSide::kRight;
};

// Drops grasps approaching from the side opposite the hand and grasps outside
// the height band, then orders by tilt of the approach axis from the
// horizontal plane (ascending), confidence (descending), input index.
// Throws NoFeasibleGrasp if nothing survives.
std::vector<GraspCandidate> filter_grasps(const std::vector<GraspCandidate>& cands,
                                          const SceneContext& ctx);

enum class OffsetFrame { kGraspLocal, kBase };

struct RetargetOptions {
  double offset_deg = 45.0;
  double yaw_limit_deg = 70.0;
  OffsetFrame frame = OffsetFrame::kGraspLocal;
};

struct RetargetResult {
  Pose pose;
  bool clipped = false;
  // Pitch within 1 degree of +-90: yaw is ill-defined, clipping skipped.
  bool gimbal_bypass = false;
};

RetargetResult retarget_to_hand_detailed(const GraspCandidate& g,
                                         const RetargetOptions& opt = {});
// Throws AlreadyRetargeted when g.retargeted is set.
Pose retarget_to_hand(const GraspCandidate& g, const RetargetOptions& opt = {});
GraspCandidate retarget_candidate(const GraspCandidate& g,
                                  const RetargetOptions& opt = {});

// JSONL grasp lists: {"pose":[7], "confidence":c, "width":w[, "retargeted":b]}.
std::vector<GraspCandidate> grasps_from_jsonl(const std::string& text);
std::string grasps_to_jsonl(const std::vector<GraspCandidate>& grasps);

}  // namespace reach

#endif  // REACH_RETARGET_H_
