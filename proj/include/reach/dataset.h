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

#ifndef REACH_DATASET_H_
#define REACH_DATASET_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "reach/control.h"
#include "reach/plant.h"
#include "reach/residual.h"

namespace reach {

// One tick of a collection run. Base poses are pelvis poses in the world:
// `fk_base` from the nominal leg chain, `mocap_base` from the motion capture.
struct Sample {
  int episode = 0;
  int t = 0;
  JointVector x;  // arm encoder reading
  Pose fk_pose;   // nominal arm FK, pelvis frame
  Pose mocap_ee;  // pelvis frame
  JointVector y;  // leg encoder reading
  Pose fk_base;
  Pose mocap_base;
};

struct DatasetHeader {
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::uint64_t plant_hash = 0;
  std::uint64_t chain_hash = 0;
  int ticks_per_goal = 0;
  int episodes = 0;
  int skipped_goals = 0;
};

struct Dataset {
  DatasetHeader header;
  std::vector<Sample> samples;

  int size() const { return static_cast<int>(samples.size()); }
  // First validation index: floor(2n/3). Samples before it are training data.
  int split_index() const { return size() * 2 / 3; }
  std::uint64_t hash() const;
};

struct CollectConfig {
  int samples = 50000;
  int ticks_per_goal = 200;
  double dither = 0.05;  // rad, uniform per-episode arm command offset
  std::uint64_t seed = 0;
  EpisodeConfig episode;  // horizon is replaced by ticks_per_goal

  CollectConfig();
  std::uint64_t hash() const;
};

// Drives the plant through `goals` (cycled as needed) with analytical
// estimators until `cfg.samples` ticks are recorded. Each episode starts from
// the previous one's last command. Goals the planner cannot reach are skipped.
// When `calibration` is non-null it receives the encoder reading and true
// pelvis pose of every tick.
Dataset collect_dataset(const PlantModel& plant, const std::vector<Pose>& goals,
                        const CollectConfig& cfg,
                        std::vector<CalibrationSample>* calibration = nullptr);

std::string dataset_to_jsonl(const Dataset& d);
Dataset dataset_from_jsonl(const std::string& text);

// End-effector training set over samples [begin, end). Residual labels are
// mocap * FK^-1; direct labels are the mocap pose.
TrainingSet fk_training_set(const Dataset& d, int begin, int end, bool residual);

using IndexPair = std::pair<int, int>;

// `count` random (m, n) pairs with m <= n inside one episode, both in
// [begin, end).
std::vector<IndexPair> odometry_pairs(const Dataset& d, int begin, int end, int count,
                                      std::uint64_t seed);
// (first index of the episode inside [begin, end), n) for every n in range.
std::vector<IndexPair> start_pairs(const Dataset& d, int begin, int end);

// Odometry training set for the pairs. The target is the mocap motion of the
// starting base seen from the current base; residual labels divide out the
// analytical estimate.
TrainingSet odometry_training_set(const Dataset& d, const KinematicChain& leg,
                                  const std::vector<IndexPair>& pairs, bool residual);

// Mean translation error (m) of an end-effector model against mocap over
// [begin, end). A null model means analytical FK.
double fk_translation_error(const Dataset& d, const KinematicChain& arm, const ResidualModel* model,
                            int begin, int end);
// Mean translation error (m) of odometry from each episode start, against
// mocap, over [begin, end). A null model means analytical odometry.
double odometry_translation_error(const Dataset& d, const KinematicChain& leg,
                                  const ResidualModel* model, int begin, int end);

}  // namespace reach

#endif  // REACH_DATASET_H_
