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

// Reachable-workspace estimation by voxel counting.

#ifndef REACH_WORKSPACE_H_
#define REACH_WORKSPACE_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "reach/chain.h"
#include "reach/ik.h"

namespace reach {

struct Box {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return (p.array() >= lo.array()).all() && (p.array() <= hi.array()).all();
  }
};

struct WorkspaceMap {
  Box bounds;
  double resolution = 0.0;
  std::array<int, 3> dims{0, 0, 0};
  std::vector<std::uint8_t> reachable;  // x fastest, then y, then z
  std::int64_t count = 0;
  double volume = 0.0;  // count * resolution^3

  std::size_t index(int ix, int iy, int iz) const {
    return static_cast<std::size_t>(ix) +
           static_cast<std::size_t>(dims[0]) *
               (static_cast<std::size_t>(iy) + static_cast<std::size_t>(dims[1]) * iz);
  }
  Vec3 center(int ix, int iy, int iz) const;
};

struct WorkspaceConfig {
  IkConfig ik = [] {
    IkConfig c;
    c.position_only = true;
    c.max_iterations = 100;
    c.pos_tol = 0.005;
    c.restarts = 0;
    return c;
  }();
  int num_seeds = 8;
  int threads = 0;  // 0: hardware concurrency
};

// Deterministic seeds spread over the joint-limit box. Seed 0 is the zero
// configuration clamped into limits.
std::vector<JointVector> workspace_seeds(const KinematicChain& chain, int count);

// Voxel centers sit at lo + (i + 0.5) * resolution. A voxel is reachable iff
// position-only IK from any seed reaches its center within cfg.ik.pos_tol.
// The result does not depend on evaluation order or thread count.
WorkspaceMap estimate_workspace(const KinematicChain& chain, const Box& bounds,
                                double resolution, const WorkspaceConfig& cfg = {});

// Text export: header lines followed by a run-length-encoded bitmap.
std::string workspace_to_text(const WorkspaceMap& map);
WorkspaceMap workspace_from_text(const std::string& text);
// "config_name,N_reach,volume_m3" data row (no header).
std::string workspace_csv_row(const std::string& config_name, const WorkspaceMap& map);

}  // namespace reach

#endif  // REACH_WORKSPACE_H_
