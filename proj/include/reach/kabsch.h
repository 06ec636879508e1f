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

// Least-squares rigid / similarity alignment of corresponded point sets.

#ifndef REACH_KABSCH_H_
#define REACH_KABSCH_H_

#include <vector>

#include "reach/se3.h"

namespace reach {

struct Correspondences {
  std::vector<Vec3> src;
  std::vector<Vec3> dst;
};

struct Alignment {
  Pose pose;           // dst ~= scale * R * src + t
  double scale = 1.0;  // exactly 1 unless with_scale
  double rmse = 0.0;   // meters
};

// Minimizes sum |s R src_i + t - dst_i|^2 with det(R) = +1. Throws
// DegenerateInput for fewer than 3 pairs, mismatched sizes, or collinear src.
Alignment kabsch_umeyama(const Correspondences& c, bool with_scale = false);

}  // namespace reach

#endif  // REACH_KABSCH_H_
