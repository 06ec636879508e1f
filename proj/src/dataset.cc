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

#include "reach/dataset.h"

#include <algorithm>
#include <random>
#include <sstream>

#include <json.hpp>

#include "reach/errors.h"

namespace reach {
namespace {

using nlohmann::json;

json pose_json(const Pose& p) {
  auto a = p.to_array();
  return json(std::vector<double>(a.begin(), a.end()));
}

json vec_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

Pose pose_from(const json& j) { return Pose::FromArray(j.get<std::vector<double>>()); }

JointVector vec_from(const json& j) {
  auto d = j.get<std::vector<double>>();
  return Eigen::Map<JointVector>(d.data(), static_cast<Eigen::Index>(d.size()));
}

void check_range(const Dataset& d, int begin, int end) {
  if (begin < 0 || end > d.size() || begin >= end) throw Error("sample range is empty or out of bounds");
}

Pose true_odometry(const Sample& from, const Sample& to) {
  return inv_compose(from.mocap_base, to.mocap_base);
}

}  // namespace

std::uint64_t Dataset::hash() const {
  std::string buf;
  auto put = [&](double v) { buf.append(reinterpret_cast<const char*>(&v), sizeof v); };
  for (const Sample& s : samples) {
    put(s.episode);
    put(s.t);
    for (double v : s.x) put(v);
    for (double v : s.mocap_ee.to_array()) put(v);
    for (double v : s.y) put(v);
    for (double v : s.mocap_base.to_array()) put(v);
  }
  return fnv1a(buf);
}

CollectConfig::CollectConfig() {
  episode.grasp = false;
  episode.replan = false;
}

std::uint64_t CollectConfig::hash() const {
  std::ostringstream os;
  os.precision(17);
  os << samples << ' ' << ticks_per_goal << ' ' << dither << ' ' << seed << ' '
     << episode.replan_every << ' ' << episode.replan << ' ' << episode.goal_adjust << ' '
     << episode.grasp << ' ' << episode.executor.gain << ' ' << episode.executor.leak;
  return fnv1a(os.str());
}

Dataset collect_dataset(const PlantModel& plant, const std::vector<Pose>& goals,
                        const CollectConfig& cfg, std::vector<CalibrationSample>* calibration) {
  if (goals.empty()) throw ConfigError("collection needs at least one goal");
  if (cfg.samples <= 0 || cfg.ticks_per_goal <= 0) throw ConfigError("collection sizes must be positive");
  const Robot& robot = *plant.robot;
  const int na = robot.arm_dof();

  Dataset d;
  d.header.seed = cfg.seed;
  d.header.config_hash = cfg.hash();
  d.header.plant_hash = plant.cfg.hash();
  d.header.chain_hash = robot.hash();
  d.header.ticks_per_goal = cfg.ticks_per_goal;
  d.samples.reserve(cfg.samples);

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> dither(-cfg.dither, cfg.dither);
  JointVector q0 = robot.ready;
  int attempt = 0;
  int failures_in_row = 0;
  while (d.size() < cfg.samples) {
    const Pose& goal = goals[attempt % goals.size()];
    EpisodeConfig ep = cfg.episode;
    ep.horizon = std::min(cfg.ticks_per_goal, cfg.samples - d.size());
    ep.command_offset.resize(na);
    for (int i = 0; i < na; ++i) ep.command_offset[i] = dither(rng);

    const int episode = attempt;
    auto record = [&](const PlantModel& m, const PlantState& s) {
      Sample smp;
      smp.episode = episode;
      smp.t = s.t;
      smp.x = s.q_measured.tail(na);
      smp.fk_pose = fk(robot.arm, smp.x);
      MocapReading mo = mocap_read(m, s);
      smp.mocap_ee = mo.ee;
      smp.y = s.y_measured;
      smp.fk_base = robot.ankle_world * fk(robot.leg, s.y_measured);
      smp.mocap_base = mo.base;
      d.samples.push_back(std::move(smp));
      if (calibration) calibration->push_back({s.q_measured.tail(na), s.base_true, episode});
    };
    ++attempt;
    try {
      RolloutLog log = run_episode(plant, Estimators{}, goal, q0, ep, episode, record);
      q0 = log.ticks.back().q_cmd;
      ++d.header.episodes;
      failures_in_row = 0;
    } catch (const IkInfeasible&) {
      ++d.header.skipped_goals;
    } catch (const PlanBlocked&) {
      ++d.header.skipped_goals;
    }
    if (d.header.episodes == 0 && ++failures_in_row >= static_cast<int>(goals.size())) {
      throw ConfigError("no collection goal is reachable");
    }
  }
  return d;
}

std::string dataset_to_jsonl(const Dataset& d) {
  const DatasetHeader& h = d.header;
  json head = {{"type", "dataset"},
               {"seed", h.seed},
               {"config_hash", hex64(h.config_hash)},
               {"plant_hash", hex64(h.plant_hash)},
               {"chain_hash", hex64(h.chain_hash)},
               {"ticks_per_goal", h.ticks_per_goal},
               {"episodes", h.episodes},
               {"skipped_goals", h.skipped_goals},
               {"samples", d.size()}};
  std::string out = head.dump() + "\n";
  for (const Sample& s : d.samples) {
    json j = {{"episode", s.episode},          {"t", s.t},
              {"x", vec_json(s.x)},            {"fk_pose", pose_json(s.fk_pose)},
              {"mocap_ee", pose_json(s.mocap_ee)}, {"y", vec_json(s.y)},
              {"fk_base", pose_json(s.fk_base)}, {"mocap_base", pose_json(s.mocap_base)}};
    out += j.dump() + "\n";
  }
  return out;
}

Dataset dataset_from_jsonl(const std::string& text) {
  Dataset d;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  int declared = -1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      if (!have_header) {
        if (j.at("type").get<std::string>() != "dataset") throw ConfigError("not a dataset");
        DatasetHeader& h = d.header;
        h.seed = j.at("seed").get<std::uint64_t>();
        h.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
        h.plant_hash = std::stoull(j.at("plant_hash").get<std::string>(), nullptr, 16);
        h.chain_hash = std::stoull(j.at("chain_hash").get<std::string>(), nullptr, 16);
        h.ticks_per_goal = j.at("ticks_per_goal").get<int>();
        h.episodes = j.at("episodes").get<int>();
        h.skipped_goals = j.at("skipped_goals").get<int>();
        declared = j.at("samples").get<int>();
        d.samples.reserve(declared);
        have_header = true;
        continue;
      }
      Sample s;
      s.episode = j.at("episode").get<int>();
      s.t = j.at("t").get<int>();
      s.x = vec_from(j.at("x"));
      s.fk_pose = pose_from(j.at("fk_pose"));
      s.mocap_ee = pose_from(j.at("mocap_ee"));
      s.y = vec_from(j.at("y"));
      s.fk_base = pose_from(j.at("fk_base"));
      s.mocap_base = pose_from(j.at("mocap_base"));
      d.samples.push_back(std::move(s));
    } catch (const std::exception& e) {
      throw ParseError(lineno, 0, std::string("dataset: ") + e.what());
    }
  }
  if (!have_header) throw ParseError(lineno, 0, "dataset has no header");
  if (declared != d.size()) {
    throw ParseError(lineno, 0, "dataset declares " + std::to_string(declared) + " samples but has " +
                                    std::to_string(d.size()));
  }
  return d;
}

TrainingSet fk_training_set(const Dataset& d, int begin, int end, bool residual) {
  check_range(d, begin, end);
  const int n = end - begin;
  TrainingSet t;
  t.features.resize(19, n);
  t.labels.resize(9, n);
  for (int i = 0; i < n; ++i) {
    const Sample& s = d.samples[begin + i];
    t.features.col(i) = fk_features(s.x, s.fk_pose);
    Pose label = residual ? compose(inv_compose(Pose(), s.fk_pose), s.mocap_ee) : s.mocap_ee;
    t.labels.col(i) = encode_pose(label);
  }
  return t;
}

std::vector<IndexPair> odometry_pairs(const Dataset& d, int begin, int end, int count,
                                      std::uint64_t seed) {
  check_range(d, begin, end);
  // Runs of consecutive samples from one episode.
  std::vector<std::pair<int, int>> runs;
  for (int i = begin; i < end;) {
    int j = i;
    while (j < end && d.samples[j].episode == d.samples[i].episode) ++j;
    runs.push_back({i, j});
    i = j;
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(begin, end - 1);
  std::vector<IndexPair> out;
  out.reserve(count);
  std::size_t run = 0;
  std::vector<int> run_of(end - begin);
  for (std::size_t r = 0; r < runs.size(); ++r)
    for (int i = runs[r].first; i < runs[r].second; ++i) run_of[i - begin] = static_cast<int>(r);
  for (int k = 0; k < count; ++k) {
    int n = pick(rng);
    run = run_of[n - begin];
    std::uniform_int_distribution<int> from(runs[run].first, n);
    out.push_back({from(rng), n});
  }
  return out;
}

std::vector<IndexPair> start_pairs(const Dataset& d, int begin, int end) {
  check_range(d, begin, end);
  std::vector<IndexPair> out;
  out.reserve(end - begin);
  int start = begin;
  for (int n = begin; n < end; ++n) {
    if (d.samples[n].episode != d.samples[start].episode) start = n;
    out.push_back({start, n});
  }
  return out;
}

TrainingSet odometry_training_set(const Dataset& d, const KinematicChain& leg,
                                  const std::vector<IndexPair>& pairs, bool residual) {
  TrainingSet t;
  const int n = static_cast<int>(pairs.size());
  t.features.resize(21, n);
  t.labels.resize(9, n);
  for (int i = 0; i < n; ++i) {
    const Sample& a = d.samples[pairs[i].first];
    const Sample& b = d.samples[pairs[i].second];
    Pose analytic = analytical_odometry(leg, b.y, a.y);
    t.features.col(i) = odometry_features(b.y, a.y, analytic);
    Pose truth = true_odometry(a, b);
    Pose label = residual ? compose(inv_compose(Pose(), analytic), truth) : truth;
    t.labels.col(i) = encode_pose(label);
  }
  return t;
}

double fk_translation_error(const Dataset& d, const KinematicChain& arm, const ResidualModel* model,
                            int begin, int end) {
  check_range(d, begin, end);
  double sum = 0.0;
  for (int i = begin; i < end; ++i) {
    const Sample& s = d.samples[i];
    Pose est = model ? corrected_fk(*model, arm, s.x) : s.fk_pose;
    sum += (est.translation() - s.mocap_ee.translation()).norm();
  }
  return sum / (end - begin);
}

double odometry_translation_error(const Dataset& d, const KinematicChain& leg,
                                  const ResidualModel* model, int begin, int end) {
  double sum = 0.0;
  std::vector<IndexPair> pairs = start_pairs(d, begin, end);
  for (const auto& [m, n] : pairs) {
    const Sample& a = d.samples[m];
    const Sample& b = d.samples[n];
    Pose est = model ? corrected_odometry(*model, leg, b.y, a.y) : analytical_odometry(leg, b.y, a.y);
    sum += (est.translation() - true_odometry(a, b).translation()).norm();
  }
  return sum / static_cast<double>(pairs.size());
}

}  // namespace reach
