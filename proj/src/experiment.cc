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

#include "reach/experiment.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>

#include "reach/errors.h"
#include "reach/io.h"
#include "reach/kvtext.h"

namespace reach {
namespace {

[[noreturn]] void bad_key(const KvEntry& e, const std::string& section) {
  throw ParseError(e.where.line, e.where.offset,
                   "unknown key '" + e.key + "' in section [" + section + "]");
}

void read_pair(const KvValue& v, double out[2]) {
  std::vector<double> p = v.as_numbers(2);
  out[0] = p[0];
  out[1] = p[1];
}

int as_int(const KvValue& v) {
  double d = v.as_number();
  if (d != std::floor(d) || std::abs(d) > 2e9) {
    throw ParseError(v.where.line, v.where.offset, "expected an integer");
  }
  return static_cast<int>(d);
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string pair(const double v[2]) { return "[" + num(v[0]) + ", " + num(v[1]) + "]"; }

const char* flag(bool b) { return b ? "true" : "false"; }

using Handler = std::function<void(const KvValue&)>;

void dispatch(const KvEntry& section, const std::map<std::string, Handler>& handlers) {
  for (const KvEntry& e : section.children) {
    if (e.is_block) bad_key(e, section.key);
    auto it = handlers.find(e.key);
    if (it == handlers.end()) bad_key(e, section.key);
    it->second(e.value);
  }
}

}  // namespace

ExperimentConfig::ExperimentConfig() {
  episode.grasp = false;
  collect.samples = 50000;
  collect.ticks_per_goal = 200;
}

void ExperimentConfig::validate() const {
  auto box = [](const double r[2], const char* what) {
    if (!(r[0] < r[1])) throw ConfigError(std::string("goal range ") + what + " needs lo < hi");
  };
  box(goals.x, "x");
  box(goals.y, "y");
  box(goals.z, "z");
  box(goals.yaw_deg, "yaw_deg");
  box(goals.table_band, "table_band");
  if (goals.preset != "box" && goals.preset != "tables") {
    throw ConfigError("goal preset must be 'box' or 'tables'");
  }
  if (goals.count <= 0) throw ConfigError("goal count must be positive");
  if (goals.preset == "tables" && goals.table_heights.empty()) throw ConfigError("no table heights");
  if (!(plant.lag > 0.0 && plant.lag <= 1.0)) throw ConfigError("plant lag must be in (0, 1]");
  if (plant.mocap_noise_sigma < 0.0 || plant.sway_amplitude < 0.0) {
    throw ConfigError("plant noise and sway must be non-negative");
  }
  if (collect.samples <= 0 || collect.ticks_per_goal <= 0 || collect_goals <= 0) {
    throw ConfigError("collection sizes must be positive");
  }
  if (train.epochs < 0 || train.batch <= 0 || train.width <= 0 || !(train.lr > 0.0)) {
    throw ConfigError("invalid training hyperparameters");
  }
  if (episode.horizon <= 0 || episode.replan_every <= 0) {
    throw ConfigError("horizon and replan period must be positive");
  }
  episode.adjust.validate();
  if (!robots_dir.empty() && !std::filesystem::is_directory(robots_dir)) {
    throw ConfigError("robots directory '" + robots_dir + "' does not exist");
  }
}

std::string ExperimentConfig::to_text() const {
  std::string s;
  s += "[experiment]\n";
  s += "name = \"" + name + "\"\n";
  s += "seed = " + std::to_string(seed) + "\n";
  s += "robots = \"" + robots_dir + "\"\n";
  s += "residual = " + std::string(flag(residual)) + "\n";
  s += "\n[goals]\n";
  s += "preset = \"" + goals.preset + "\"\n";
  s += "x = " + pair(goals.x) + "\n";
  s += "y = " + pair(goals.y) + "\n";
  s += "z = " + pair(goals.z) + "\n";
  s += "yaw_deg = " + pair(goals.yaw_deg) + "\n";
  s += "table_heights = [";
  for (std::size_t i = 0; i < goals.table_heights.size(); ++i) {
    s += (i ? ", " : "") + num(goals.table_heights[i]);
  }
  s += "]\n";
  s += "table_band = " + pair(goals.table_band) + "\n";
  s += "count = " + std::to_string(goals.count) + "\n";
  s += "\n[plant]\n";
  s += "calibrate = " + std::string(flag(plant.calibrate)) + "\n";
  s += "ee_target = " + num(plant.targets.ee_mean) + "\n";
  s += "odom_target = " + num(plant.targets.odom_mean) + "\n";
  s += "calibration_goals = " + std::to_string(plant.calibration_goals) + "\n";
  s += "mocap_noise_sigma = " + num(plant.mocap_noise_sigma) + "\n";
  s += "sway_amplitude = " + num(plant.sway_amplitude) + "\n";
  s += "sway_gain = " + num(plant.sway_gain) + "\n";
  s += "lag = " + num(plant.lag) + "\n";
  s += "\n[collect]\n";
  s += "samples = " + std::to_string(collect.samples) + "\n";
  s += "ticks_per_goal = " + std::to_string(collect.ticks_per_goal) + "\n";
  s += "goals = " + std::to_string(collect_goals) + "\n";
  s += "dither = " + num(collect.dither) + "\n";
  s += "\n[train]\n";
  s += "lr = " + num(train.lr) + "\n";
  s += "weight_decay = " + num(train.weight_decay) + "\n";
  s += "batch = " + std::to_string(train.batch) + "\n";
  s += "epochs = " + std::to_string(train.epochs) + "\n";
  s += "width = " + std::to_string(train.width) + "\n";
  s += "\n[control]\n";
  s += "horizon = " + std::to_string(episode.horizon) + "\n";
  s += "replan_every = " + std::to_string(episode.replan_every) + "\n";
  s += "replan = " + std::string(flag(episode.replan)) + "\n";
  s += "goal_adjust = " + std::string(flag(episode.goal_adjust)) + "\n";
  s += "grasp = " + std::string(flag(episode.grasp)) + "\n";
  s += "grasp_thresh = " + num(episode.grasp_thresh) + "\n";
  s += "alpha = " + num(episode.adjust.alpha) + "\n";
  s += "start_thresh = " + num(episode.adjust.start_thresh) + "\n";
  s += "stop_thresh = " + num(episode.adjust.stop_thresh) + "\n";
  s += "gain = " + num(episode.executor.gain) + "\n";
  s += "leak = " + num(episode.executor.leak) + "\n";
  s += "ee_estimator = \"" + std::string(estimator_name(ee_estimator)) + "\"\n";
  s += "odom_estimator = \"" + std::string(estimator_name(odom_estimator)) + "\"\n";
  return s;
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(to_text()); }

ExperimentConfig parse_experiment(const std::string& text, const std::string& base_dir) {
  KvDocument doc = parse_kv(text);
  ExperimentConfig c;
  auto number = [](double& out) { return [&out](const KvValue& v) { out = v.as_number(); }; };
  auto integer = [](int& out) { return [&out](const KvValue& v) { out = as_int(v); }; };
  auto boolean = [](bool& out) { return [&out](const KvValue& v) { out = v.as_bool(); }; };
  auto range = [](double* out) { return [out](const KvValue& v) { read_pair(v, out); }; };

  std::map<std::string, std::map<std::string, Handler>> sections;
  sections["experiment"] = {
      {"name", [&](const KvValue& v) { c.name = v.as_string(); }},
      {"seed",
       [&](const KvValue& v) {
         double d = v.as_number();
         if (d < 0 || d != std::floor(d)) throw ParseError(v.where.line, v.where.offset, "seed must be a non-negative integer");
         c.seed = static_cast<std::uint64_t>(d);
       }},
      {"robots",
       [&](const KvValue& v) {
         std::filesystem::path p(v.as_string());
         if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
         c.robots_dir = p.lexically_normal().string();
       }},
      {"residual", boolean(c.residual)},
  };
  sections["goals"] = {
      {"preset", [&](const KvValue& v) { c.goals.preset = v.as_string(); }},
      {"x", range(c.goals.x)},
      {"y", range(c.goals.y)},
      {"z", range(c.goals.z)},
      {"yaw_deg", range(c.goals.yaw_deg)},
      {"table_heights", [&](const KvValue& v) { c.goals.table_heights = v.as_numbers(); }},
      {"table_band", range(c.goals.table_band)},
      {"count", integer(c.goals.count)},
  };
  sections["plant"] = {
      {"calibrate", boolean(c.plant.calibrate)},
      {"ee_target", number(c.plant.targets.ee_mean)},
      {"odom_target", number(c.plant.targets.odom_mean)},
      {"calibration_goals", integer(c.plant.calibration_goals)},
      {"mocap_noise_sigma", number(c.plant.mocap_noise_sigma)},
      {"sway_amplitude", number(c.plant.sway_amplitude)},
      {"sway_gain", number(c.plant.sway_gain)},
      {"lag", number(c.plant.lag)},
  };
  sections["collect"] = {
      {"samples", integer(c.collect.samples)},
      {"ticks_per_goal", integer(c.collect.ticks_per_goal)},
      {"goals", integer(c.collect_goals)},
      {"dither", number(c.collect.dither)},
  };
  sections["train"] = {
      {"lr", number(c.train.lr)},
      {"weight_decay", number(c.train.weight_decay)},
      {"batch", integer(c.train.batch)},
      {"epochs", integer(c.train.epochs)},
      {"width", integer(c.train.width)},
  };
  sections["control"] = {
      {"horizon", integer(c.episode.horizon)},
      {"replan_every", integer(c.episode.replan_every)},
      {"replan", boolean(c.episode.replan)},
      {"goal_adjust", boolean(c.episode.goal_adjust)},
      {"grasp", boolean(c.episode.grasp)},
      {"grasp_thresh", number(c.episode.grasp_thresh)},
      {"alpha", number(c.episode.adjust.alpha)},
      {"start_thresh", number(c.episode.adjust.start_thresh)},
      {"stop_thresh", number(c.episode.adjust.stop_thresh)},
      {"gain", number(c.episode.executor.gain)},
      {"leak", number(c.episode.executor.leak)},
      {"ee_estimator", [&](const KvValue& v) { c.ee_estimator = estimator_from_name(v.as_string()); }},
      {"odom_estimator", [&](const KvValue& v) { c.odom_estimator = estimator_from_name(v.as_string()); }},
  };

  for (const KvEntry& e : doc.entries) {
    auto it = sections.find(e.key);
    if (!e.is_block || it == sections.end()) {
      throw ParseError(e.where.line, e.where.offset, "unknown section '" + e.key + "'");
    }
    dispatch(e, it->second);
  }
  c.train.seed = c.seed;
  c.collect.seed = c.seed;
  c.validate();
  return c;
}

ExperimentConfig load_experiment(const std::string& path) {
  std::string text = read_text_file(path);
  std::filesystem::path dir = std::filesystem::path(path).parent_path();
  return parse_experiment(text, dir.empty() ? "." : dir.string());
}

void apply_ablation(ExperimentConfig& cfg, const std::string& s) {
  auto eq = s.find('=');
  if (eq == std::string::npos) throw ConfigError("ablation switch '" + s + "' must be key=on|off");
  std::string key = s.substr(0, eq), val = s.substr(eq + 1);
  if (val != "on" && val != "off") throw ConfigError("ablation value must be 'on' or 'off' in '" + s + "'");
  const bool on = val == "on";
  if (key == "neural_fk") {
    cfg.ee_estimator = on ? EstimatorKind::kNeural : EstimatorKind::kAnalytical;
  } else if (key == "neural_odom") {
    cfg.odom_estimator = on ? EstimatorKind::kNeural : EstimatorKind::kAnalytical;
  } else if (key == "goal_adjust") {
    cfg.episode.goal_adjust = on;
  } else if (key == "replan") {
    cfg.episode.replan = on;
  } else if (key == "grasp") {
    cfg.episode.grasp = on;
  } else if (key == "residual") {
    cfg.residual = on;
  } else {
    throw ConfigError("unknown ablation key '" + key + "'");
  }
}

std::vector<Pose> sample_goals(const Robot& robot, const GoalSampling& g, std::uint64_t seed,
                               const PlannerConfig& planner) {
  std::mt19937_64 rng(seed);
  const Mat3 grip = fk(robot.arm, robot.ready.tail(robot.arm_dof())).rotation_matrix();
  std::vector<std::pair<double, double>> bands;
  if (g.preset == "tables") {
    for (double h : g.table_heights) bands.push_back({h + g.table_band[0], h + g.table_band[1]});
  } else {
    bands.push_back({g.z[0], g.z[1]});
  }
  std::uniform_real_distribution<double> ux(g.x[0], g.x[1]), uy(g.y[0], g.y[1]),
      uyaw(deg2rad(g.yaw_deg[0]), deg2rad(g.yaw_deg[1]));
  std::vector<Pose> out;
  for (const auto& [zlo, zhi] : bands) {
    std::uniform_real_distribution<double> uz(zlo, zhi);
    int accepted = 0, tries = 0;
    while (accepted < g.count) {
      if (++tries > 200 * g.count) throw ConfigError("goal region is almost entirely unreachable");
      double x = ux(rng), y = uy(rng), z = uz(rng), yaw = uyaw(rng);
      Pose goal(Vec3(x, y, z - robot.pelvis_height), Mat3(axis_angle(Vec3::UnitZ(), yaw) * grip));
      IkResult ik = solve_ik(robot.planning, goal, robot.ready, planner.ik);
      if (!ik.converged) continue;
      out.push_back(goal);
      ++accepted;
    }
  }
  return out;
}

PlantConfig make_plant_config(const Robot& robot, const PlantSetup& setup, std::uint64_t seed,
                              const GoalSampling& goals, CalibrationReport* report) {
  PlantConfig shape = PlantConfig::DefaultShape(robot);
  shape.mocap_noise_sigma = setup.mocap_noise_sigma;
  shape.sway_amplitude = setup.sway_amplitude;
  shape.sway_gain = setup.sway_gain;
  shape.lag = setup.lag;
  shape.seed = seed;
  shape.validate(robot);
  if (!setup.calibrate) return shape;

  GoalSampling g = goals;
  g.preset = "box";
  g.count = setup.calibration_goals;
  std::vector<Pose> sweep = sample_goals(robot, g, seed ^ 0xca11b4a7e5ull);
  CollectConfig cc;
  cc.ticks_per_goal = 200;
  cc.samples = cc.ticks_per_goal * setup.calibration_goals;
  cc.seed = seed;
  // The second pass repeats the sweep on the plant fitted by the first.
  PlantConfig cfg = shape;
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<CalibrationSample> samples;
    PlantModel model(robot, cfg);
    collect_dataset(model, sweep, cc, &samples);
    cfg = calibrate_plant(robot, shape, samples, setup.targets, report);
  }
  return cfg;
}

Estimators estimators_for(const ExperimentConfig& cfg, const ResidualModel* ee_model,
                          const ResidualModel* odom_model) {
  Estimators e;
  e.ee = cfg.ee_estimator;
  e.odom = cfg.odom_estimator;
  if (e.ee == EstimatorKind::kNeural) {
    if (!ee_model) throw UpstreamMissing("the neural end-effector estimator needs a checkpoint");
    e.ee_model = ee_model;
  }
  if (e.odom == EstimatorKind::kNeural) {
    if (!odom_model) throw UpstreamMissing("the neural odometry estimator needs a checkpoint");
    e.odom_model = odom_model;
  }
  return e;
}

std::vector<RolloutLog> run_sweep(const PlantModel& plant, const Estimators& est,
                                  const std::vector<Pose>& goals, const EpisodeConfig& cfg,
                                  const std::string& config_name, std::uint64_t config_hash) {
  std::vector<RolloutLog> logs;
  logs.reserve(goals.size());
  for (std::size_t i = 0; i < goals.size(); ++i) {
    RolloutLog log = run_episode(plant, est, goals[i], plant.robot->ready, cfg, static_cast<int>(i));
    log.header.config_name = config_name;
    log.header.config_hash = config_hash;
    logs.push_back(std::move(log));
  }
  return logs;
}

namespace {
constexpr std::uint64_t kCollectGoalSalt = 0xc011ull;
constexpr std::uint64_t kTrackGoalSalt = 0x7124ull;
}  // namespace

std::vector<Pose> collection_goals(const Robot& robot, const ExperimentConfig& cfg) {
  GoalSampling g = cfg.goals;
  g.preset = "box";
  g.count = cfg.collect_goals;
  return sample_goals(robot, g, cfg.seed ^ kCollectGoalSalt);
}

std::vector<Pose> tracking_goals(const Robot& robot, const ExperimentConfig& cfg) {
  return sample_goals(robot, cfg.goals, cfg.seed ^ kTrackGoalSalt, cfg.episode.planner);
}

Dataset collect_for(const Robot& robot, const PlantModel& plant, const ExperimentConfig& cfg) {
  CollectConfig cc = cfg.collect;
  cc.seed = cfg.seed;
  return collect_dataset(plant, collection_goals(robot, cfg), cc);
}

ResidualModel train_end_effector(const Dataset& d, const ExperimentConfig& cfg) {
  const int s = d.split_index(), n = d.size();
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  ResidualModel m = ResidualModel::Zero(ModelRole::kEndEffector, cfg.residual, tc.width, cfg.seed);
  m.dataset_hash = d.hash();
  train_model(m, fk_training_set(d, 0, s, cfg.residual), fk_training_set(d, s, n, cfg.residual), tc);
  return m;
}

ResidualModel train_odometry(const Robot& robot, const Dataset& d, const ExperimentConfig& cfg) {
  const int s = d.split_index(), n = d.size();
  const bool res = cfg.residual;
  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  ResidualModel m = ResidualModel::Zero(ModelRole::kOdometry, res, tc.width, cfg.seed);
  m.dataset_hash = d.hash();
  TrainingSet val = odometry_training_set(d, robot.leg, start_pairs(d, s, n), res);
  TrainingSet train = odometry_training_set(d, robot.leg, odometry_pairs(d, 0, s, s, cfg.seed), res);
  EpochSampler resample = [&](int epoch, TrainingSet& t) {
    const std::uint64_t k = cfg.seed * 7919ull + static_cast<std::uint64_t>(epoch);
    t = odometry_training_set(d, robot.leg, odometry_pairs(d, 0, s, s, k), res);
    return true;
  };
  train_model(m, train, val, tc, resample);
  return m;
}

}  // namespace reach
