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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "reach/errors.h"

namespace reach {

std::vector<GraspCandidate> filter_grasps(const std::vector<GraspCandidate>& cands,
                                          const SceneContext& ctx) {
  // Unit vector pointing from the object toward the hand's side.
  const Vec3 hand_dir = ctx.hand_side == HandSide::kLeft ? Vec3(Vec3::UnitY()) : Vec3(-Vec3::UnitY());
  struct Keyed {
    std::int64_t tilt;  // nano-radians
    double confidence;
    std::size_t index;
  };
  std::vector<Keyed> keep;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const auto& g = cands[i];
    Vec3 approach = g.pose.rotation_matrix().col(0);
    // A grasp moving toward the hand's own side starts from the far side.
    if (approach.dot(hand_dir) > 1e-9) continue;
    double h = g.pose.translation().z() - ctx.table_height;
    if (h < ctx.band_lo || h > ctx.band_hi) continue;
    double tilt = std::asin(std::min(1.0, std::abs(approach.z())));
    keep.push_back({std::llround(tilt * 1e9), g.confidence, i});
  }
  if (keep.empty()) throw NoFeasibleGrasp("no grasp candidate survived filtering");
  std::stable_sort(keep.begin(), keep.end(), [](const Keyed& a, const Keyed& b) {
    if (a.tilt != b.tilt) return a.tilt < b.tilt;
    return a.confidence > b.confidence;
  });
  std::vector<GraspCandidate> out;
  out.reserve(keep.size());
  for (const auto& k : keep) out.push_back(cands[k.index]);
  return out;
}

RetargetResult retarget_to_hand_detailed(const GraspCandidate& g,
                                         const RetargetOptions& opt) {
  if (g.retargeted) throw AlreadyRetargeted("grasp was already retargeted");
  Mat3 offset = axis_angle(Vec3::UnitZ(), deg2rad(opt.offset_deg));
  Mat3 r = opt.frame == OffsetFrame::kGraspLocal ? Mat3(g.pose.rotation_matrix() * offset)
                                                 : Mat3(offset * g.pose.rotation_matrix());
  RetargetResult out;
  Vec3 ypr = yaw_pitch_roll(r);
  if (std::abs(std::abs(ypr[1]) - kPi / 2) < deg2rad(1.0)) {
    std::cerr << "retarget: pitch near +-90 deg, yaw clip skipped\n";
    out.gimbal_bypass = true;
  } else {
    double lim = deg2rad(opt.yaw_limit_deg);
    if (std::abs(ypr[0]) > lim) {
      out.clipped = true;
      r = from_yaw_pitch_roll(std::clamp(ypr[0], -lim, lim), ypr[1], ypr[2]);
    }
  }
  out.pose = Pose(g.pose.translation(), r);
  return out;
}

Pose retarget_to_hand(const GraspCandidate& g, const RetargetOptions& opt) {
  return retarget_to_hand_detailed(g, opt).pose;
}

GraspCandidate retarget_candidate(const GraspCandidate& g, const RetargetOptions& opt) {
  GraspCandidate out = g;
  out.pose = retarget_to_hand(g, opt);
  out.retargeted = true;
  return out;
}

std::vector<GraspCandidate> grasps_from_jsonl(const std::string& text) {
  std::vector<GraspCandidate> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      GraspCandidate g;
      g.pose = Pose::FromArray(j.at("pose").get<std::vector<double>>());
      g.confidence = j.at("confidence").get<double>();
      g.width = j.at("width").get<double>();
      g.retargeted = j.value("retargeted", false);
      if (g.confidence < 0.0 || g.confidence > 1.0) throw Error("confidence outside [0,1]");
      if (!(g.width > 0.0)) throw Error("width must be positive");
      out.push_back(g);
    } catch (const std::exception& e) {
      throw ParseError(lineno, 0, std::string("grasp record: ") + e.what());
    }
  }
  return out;
}

std::string grasps_to_jsonl(const std::vector<GraspCandidate>& grasps) {
  std::string out;
  for (const auto& g : grasps) {
    nlohmann::json j;
    auto a = g.pose.to_array();
    j["pose"] = std::vector<double>(a.begin(), a.end());
    j["confidence"] = g.confidence;
    j["width"] = g.width;
    j["retargeted"] = g.retargeted;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace reach
