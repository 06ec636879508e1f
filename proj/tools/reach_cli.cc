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

// Command-line front end: one subcommand per experiment step.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "reach/dataset.h"
#include "reach/errors.h"
#include "reach/experiment.h"
#include "reach/io.h"
#include "reach/kabsch.h"
#include "reach/retarget.h"
#include "reach/scoring.h"
#include "reach/workspace.h"

namespace fs = std::filesystem;
using namespace reach;

namespace {

constexpr int kConfigExit = 2;
constexpr int kUpstreamExit = 3;
constexpr int kRuntimeExit = 4;


struct Common {
  std::string config;
  std::string out;
  std::int64_t seed = -1;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "experiment config file");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--seed", c.seed, "seed override")->check(CLI::NonNegativeNumber);
}

std::string out_dir(const Common& c) {
  std::string dir = c.out;
  if (dir.empty()) {
    const char* env = std::getenv("REACH_OUT_DIR");
    if (env && *env) dir = env;
  }
  if (dir.empty()) throw ConfigError("no output directory: pass --out or set REACH_OUT_DIR");
  fs::create_directories(dir);
  return dir;
}

ExperimentConfig load_config(const Common& c, const std::vector<std::string>& ablations = {}) {
  ExperimentConfig cfg;
  if (!c.config.empty()) {
    if (!fs::exists(c.config)) throw ConfigError("config file '" + c.config + "' does not exist");
    cfg = load_experiment(c.config);
  }
  if (cfg.robots_dir.empty()) cfg.robots_dir = REACH_DEFAULT_ROBOTS;
  if (c.seed >= 0) cfg.seed = static_cast<std::uint64_t>(c.seed);
  cfg.train.seed = cfg.seed;
  cfg.collect.seed = cfg.seed;
  for (const auto& a : ablations) apply_ablation(cfg, a);
  cfg.validate();
  return cfg;
}

std::string require_file(const std::string& path, const char* what) {
  if (path.empty()) throw UpstreamMissing(std::string("missing ") + what);
  if (!fs::exists(path)) throw UpstreamMissing(std::string(what) + " '" + path + "' does not exist");
  return path;
}

std::string provenance(const ExperimentConfig& cfg) {
  return "# config=" + cfg.name + " config_hash=" + hex64(cfg.hash()) +
         " seed=" + std::to_string(cfg.seed) + "\n";
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

PlantConfig plant_for(const Robot& robot, const ExperimentConfig& cfg, const std::string& plant_path) {
  if (!plant_path.empty()) {
    return plant_config_from_json(robot, read_text_file(require_file(plant_path, "plant file")));
  }
  return make_plant_config(robot, cfg.plant, cfg.seed, cfg.goals);
}

Dataset load_dataset(const Robot& robot, const std::string& path) {
  Dataset d = dataset_from_jsonl(read_text_file(require_file(path, "dataset")));
  if (d.header.chain_hash != robot.hash()) {
    throw HashMismatch("dataset was collected on a different robot");
  }
  if (d.size() < 3) throw ConfigError("dataset is too small to split");
  return d;
}

std::string curves_csv(const ExperimentConfig& cfg, const ResidualModel& m) {
  std::string s = provenance(cfg) + "epoch,train_loss,val_loss\n";
  char buf[128];
  for (const auto& c : m.curves) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g\n", c.epoch, c.train_loss, c.val_loss);
    s += buf;
  }
  return s;
}

// ---- collect ----------------------------------------------------------------

int cmd_collect(const Common& c, const std::string& plant_path) {
  ExperimentConfig cfg = load_config(c);
  const std::string dir = out_dir(c);
  Robot robot = load_robot(cfg.robots_dir);
  PlantConfig pc = plant_for(robot, cfg, plant_path);
  PlantModel plant(robot, pc);
  Dataset d = collect_for(robot, plant, cfg);
  write_text_atomic(dir + "/plant.json", plant_config_to_json(robot, pc));
  write_text_atomic(dir + "/dataset.jsonl", dataset_to_jsonl(d));
  const int s = d.split_index();
  std::printf("collect: %d samples (%d train / %d val), held-out analytical error ee %.3f cm, odometry %.3f cm -> %s\n",
              d.size(), s, d.size() - s, 100 * fk_translation_error(d, robot.arm, nullptr, s, d.size()),
              100 * odometry_translation_error(d, robot.leg, nullptr, s, d.size()), dir.c_str());
  return 0;
}

// ---- train ------------------------------------------------------------------

int cmd_train(const Common& c, const std::string& data, const std::vector<std::string>& ablations,
              ModelRole role) {
  ExperimentConfig cfg = load_config(c, ablations);
  const std::string dir = out_dir(c);
  Robot robot = load_robot(cfg.robots_dir);
  Dataset d = load_dataset(robot, data);
  const int s = d.split_index(), n = d.size();
  const bool ee = role == ModelRole::kEndEffector;
  ResidualModel m = ee ? train_end_effector(d, cfg) : train_odometry(robot, d, cfg);
  const double before = ee ? fk_translation_error(d, robot.arm, nullptr, s, n)
                           : odometry_translation_error(d, robot.leg, nullptr, s, n);
  const double after = ee ? fk_translation_error(d, robot.arm, &m, s, n)
                          : odometry_translation_error(d, robot.leg, &m, s, n);
  const std::string stem = ee ? "fk" : "odom";
  save_model(m, dir + "/" + stem + "_model.json");
  write_text_atomic(dir + "/" + stem + "_curves.csv", curves_csv(cfg, m));
  std::printf("train-%s: %s model, %d epochs, held-out translation error %.3f cm -> %.3f cm (%.2fx) -> %s\n",
              stem.c_str(), cfg.residual ? "residual" : "direct", cfg.train.epochs, 100 * before,
              100 * after, after > 0 ? before / after : 0.0, dir.c_str());
  return 0;
}

// ---- track ------------------------------------------------------------------

int cmd_track(const Common& c, const std::vector<std::string>& ablations, const std::string& plant_path,
              const std::string& fk_path, const std::string& odom_path, std::string name) {
  ExperimentConfig cfg = load_config(c, ablations);
  const std::string dir = out_dir(c);
  Robot robot = load_robot(cfg.robots_dir);
  ResidualModel fk_model, odom_model;
  const ResidualModel* fk_ptr = nullptr;
  const ResidualModel* odom_ptr = nullptr;
  if (cfg.ee_estimator == EstimatorKind::kNeural) {
    fk_model = load_model(require_file(fk_path, "end-effector checkpoint (--fk-model)"));
    fk_ptr = &fk_model;
  }
  if (cfg.odom_estimator == EstimatorKind::kNeural) {
    odom_model = load_model(require_file(odom_path, "odometry checkpoint (--odom-model)"));
    odom_ptr = &odom_model;
  }
  Estimators est = estimators_for(cfg, fk_ptr, odom_ptr);
  PlantConfig pc = plant_for(robot, cfg, plant_path);
  PlantModel plant(robot, pc);
  if (name.empty()) {
    name = cfg.name;
    for (const auto& a : ablations) name += "_" + a.substr(0, a.find('=')) + "-" + a.substr(a.find('=') + 1);
  }
  std::vector<Pose> goals = tracking_goals(robot, cfg);
  std::vector<RolloutLog> logs = run_sweep(plant, est, goals, cfg.episode, name, cfg.hash());
  const std::string sub = dir + "/" + name;
  fs::create_directories(sub);
  for (const auto& log : logs) {
    char file[64];
    std::snprintf(file, sizeof(file), "/episode_%04d.jsonl", log.header.episode);
    RolloutLog copy = log;
    copy.header.seed = cfg.seed;
    write_text_atomic(sub + file, rollout_to_jsonl(copy));
  }
  Metrics m = compute_metrics(logs);
  std::printf("track: %s, %zu goals, final error %.3f +- %.3f cm, %.2f +- %.2f deg -> %s\n", name.c_str(),
              logs.size(), m.trans_mean_cm, m.trans_std_cm, m.rot_mean_deg, m.rot_std_deg, sub.c_str());
  return 0;
}

// ---- eval -------------------------------------------------------------------

std::vector<std::string> log_files(const std::vector<std::string>& inputs) {
  std::vector<std::string> files;
  for (const auto& in : inputs) {
    if (!fs::exists(in)) throw UpstreamMissing("log path '" + in + "' does not exist");
    if (fs::is_directory(in)) {
      for (const auto& e : fs::recursive_directory_iterator(in)) {
        if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path().string());
      }
    } else {
      files.push_back(in);
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw UpstreamMissing("no rollout logs found");
  return files;
}

int cmd_eval(const Common& c, const std::vector<std::string>& inputs, const std::string& robots) {
  const std::string dir = out_dir(c);
  std::map<std::string, std::vector<RolloutLog>> groups;
  std::map<std::string, std::string> prov;
  std::uint64_t chain = 0;
  bool first = true;
  for (const auto& f : log_files(inputs)) {
    RolloutLog log = rollout_from_jsonl(read_text_file(f));
    if (first) {
      chain = log.header.chain_hash;
      first = false;
    } else if (log.header.chain_hash != chain) {
      throw HashMismatch("log '" + f + "' has chain hash " + hex64(log.header.chain_hash) +
                         ", expected " + hex64(chain));
    }
    const std::string& name = log.header.config_name;
    std::string p = "# config=" + name + " config_hash=" + hex64(log.header.config_hash) +
                    " seed=" + std::to_string(log.header.seed) + "\n";
    auto [it, fresh] = prov.emplace(name, p);
    if (!fresh && it->second != p) throw ConfigError("logs of config '" + name + "' disagree on hash or seed");
    groups[name].push_back(std::move(log));
  }

  std::unique_ptr<Robot> robot;
  if (!robots.empty()) {
    robot = std::make_unique<Robot>(load_robot(robots));
    if (robot->hash() != chain) throw HashMismatch("logs were recorded on a different robot");
  }

  std::string header;
  for (const auto& [name, p] : prov) header += p;
  std::vector<std::pair<std::string, Metrics>> rows;
  std::string rewards = header + "config,term,available,weight,mean_sum,mean_weighted\n";
  for (const auto& [name, logs] : groups) {
    Metrics m = compute_metrics(logs);
    write_text_atomic(dir + "/cdf_" + name + ".csv", prov[name] + cdf_csv(m));
    rows.push_back({name, m});
    std::vector<RewardBreakdown> scores;
    for (const auto& log : logs) scores.push_back(score_rollout(log, {}, robot ? &robot->planning : nullptr));
    for (std::size_t k = 0; k < scores.front().terms.size(); ++k) {
      const RewardTerm& t = scores.front().terms[k];
      double s = 0.0, w = 0.0;
      for (const auto& b : scores) {
        s += b.terms[k].sum;
        w += b.terms[k].weighted;
      }
      if (!t.available) {
        rewards += name + "," + t.name + ",unavailable,,,\n";
        continue;
      }
      rewards += name + "," + t.name + ",yes," + fmt("%.6g", t.weight) + "," + fmt("%.6f", s / logs.size()) +
                 "," + fmt("%.6f", w / logs.size()) + "\n";
    }
  }
  write_text_atomic(dir + "/metrics.csv", header + metrics_csv(rows));
  write_text_atomic(dir + "/rewards.csv", rewards);
  for (const auto& [name, m] : rows) {
    std::printf("eval: %s n=%d final error %.3f +- %.3f cm, %.2f +- %.2f deg -> %s/metrics.csv\n", name.c_str(),
                m.n, m.trans_mean_cm, m.trans_std_cm, m.rot_mean_deg, m.rot_std_deg, dir.c_str());
  }
  return 0;
}

// ---- workspace --------------------------------------------------------------

int cmd_workspace(const Common& c, std::string chain_path, const std::string& lock,
                  const std::vector<double>& bounds, double resolution) {
  ExperimentConfig cfg = load_config(c);
  const std::string dir = out_dir(c);
  if (chain_path.empty()) chain_path = std::string(REACH_DEFAULT_ROBOTS) + "/humanoid_right_arm_waist.chain";
  KinematicChain chain = load_chain(require_file(chain_path, "chain file"));
  if (bounds.size() != 6) throw ConfigError("--bounds needs six numbers: x0 y0 z0 x1 y1 z1");
  Box box{Vec3(bounds[0], bounds[1], bounds[2]), Vec3(bounds[3], bounds[4], bounds[5])};
  if (!(box.lo.array() < box.hi.array()).all()) throw ConfigError("--bounds needs lo < hi on every axis");
  if (!(resolution > 0.0)) throw ConfigError("--resolution must be positive");

  std::string csv = provenance(cfg) + "config,voxels,resolution_m,volume_m3\n";
  std::vector<std::pair<std::string, KinematicChain>> variants = {{"full", chain}};
  if (!lock.empty()) {
    std::vector<std::string> names;
    std::stringstream ss(lock);
    for (std::string n; std::getline(ss, n, ',');)
      if (!n.empty()) names.push_back(n);
    variants.push_back({"locked", chain.with_locked(names)});
  }
  for (const auto& [name, ch] : variants) {
    WorkspaceMap map = estimate_workspace(ch, box, resolution);
    write_text_atomic(dir + "/workspace_" + name + ".txt", workspace_to_text(map));
    csv += workspace_csv_row(name, map);
    std::printf("workspace: %s %lld voxels, %.4f m^3\n", name.c_str(), static_cast<long long>(map.count), map.volume);
  }
  write_text_atomic(dir + "/workspace.csv", csv);
  return 0;
}

// ---- calibrate (point-set alignment) ------------------------------------------

Correspondences read_pairs(const std::string& path) {
  std::istringstream is(read_text_file(require_file(path, "point-pair CSV")));
  Correspondences c;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (lineno == 1 && line.find_first_of("0123456789") != 0 && line[0] != '-' && line[0] != '.') continue;
    std::vector<double> v;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParseError(lineno, 0, "point-pair CSV: '" + cell + "' is not a number");
      }
    }
    if (v.size() != 6) throw ParseError(lineno, 0, "point-pair CSV rows need sx,sy,sz,dx,dy,dz");
    c.src.push_back(Vec3(v[0], v[1], v[2]));
    c.dst.push_back(Vec3(v[3], v[4], v[5]));
  }
  return c;
}

int cmd_calibrate(const Common& c, const std::string& points, bool with_scale) {
  ExperimentConfig cfg = load_config(c);
  const std::string dir = out_dir(c);
  Correspondences pairs = read_pairs(points);
  Alignment a = kabsch_umeyama(pairs, with_scale);
  auto arr = a.pose.to_array();
  nlohmann::json j = {{"pose", std::vector<double>(arr.begin(), arr.end())},
                      {"scale", a.scale},
                      {"rmse", a.rmse},
                      {"points", pairs.src.size()},
                      {"input_hash", hex64(fnv1a(read_text_file(points)))},
                      {"config_hash", hex64(cfg.hash())},
                      {"seed", cfg.seed}};
  write_text_atomic(dir + "/alignment.json", j.dump(2) + "\n");
  std::printf("calibrate: %zu pairs, rmse %.4g mm, scale %.6f -> %s/alignment.json\n", pairs.src.size(),
              1000 * a.rmse, a.scale, dir.c_str());
  return 0;
}

// ---- retarget -------------------------------------------------------------------

int cmd_retarget(const Common& c, const std::string& in, const std::string& frame, const std::string& hand,
                 double table_height, const std::vector<double>& band, bool filter) {
  ExperimentConfig cfg = load_config(c);
  const std::string dir = out_dir(c);
  std::vector<GraspCandidate> grasps = grasps_from_jsonl(read_text_file(require_file(in, "grasp list")));
  RetargetOptions opt;
  if (frame == "base") {
    opt.frame = OffsetFrame::kBase;
  } else if (frame != "local") {
    throw ConfigError("--offset-frame must be 'local' or 'base'");
  }
  if (hand != "left" && hand != "right") throw ConfigError("--hand must be 'left' or 'right'");
  if (filter) {
    if (band.size() != 2) throw ConfigError("--band needs two numbers");
    SceneContext ctx{table_height, band[0], band[1], hand == "left" ? HandSide::kLeft : HandSide::kRight};
    grasps = filter_grasps(grasps, ctx);
    if (grasps.empty()) throw NoFeasibleGrasp("no grasp candidate survives the filter");
  }
  int clipped = 0;
  for (auto& g : grasps) {
    clipped += retarget_to_hand_detailed(g, opt).clipped ? 1 : 0;
    g = retarget_candidate(g, opt);
  }
  write_text_atomic(dir + "/retargeted.jsonl", grasps_to_jsonl(grasps));
  nlohmann::json meta = {{"config_hash", hex64(cfg.hash())}, {"seed", cfg.seed}, {"grasps", grasps.size()},
                         {"clipped", clipped}, {"offset_frame", frame}, {"hand", hand}};
  write_text_atomic(dir + "/retargeted.meta.json", meta.dump(2) + "\n");
  std::printf("retarget: %zu grasps, %d yaw-clipped -> %s/retargeted.jsonl\n", grasps.size(), clipped, dir.c_str());
  return 0;
}

// ---- calibrate-plant ----------------------------------------------------------------

int cmd_calibrate_plant(const Common& c) {
  ExperimentConfig cfg = load_config(c);
  const std::string dir = out_dir(c);
  Robot robot = load_robot(cfg.robots_dir);
  CalibrationReport rep;
  PlantConfig pc = make_plant_config(robot, cfg.plant, cfg.seed, cfg.goals, &rep);
  write_text_atomic(dir + "/plant.json", plant_config_to_json(robot, pc));
  std::string csv = provenance(cfg) + "arm_scale,leg_scale,ee_mean_cm,odom_mean_cm\n";
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f\n", rep.arm_scale, rep.leg_scale, 100 * rep.ee_mean,
                100 * rep.odom_mean);
  write_text_atomic(dir + "/calibration.csv", csv + buf);
  std::printf("calibrate-plant: arm x%.3f leg x%.3f, analytical ee %.3f cm, odometry %.3f cm -> %s/plant.json\n",
              rep.arm_scale, rep.leg_scale, 100 * rep.ee_mean, 100 * rep.odom_mean, dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"residual-aware end-effector control experiments"};
  app.require_subcommand(1);

  Common common;
  std::vector<std::string> ablations;
  std::string plant_path, data, fk_path, odom_path, name, robots, chain_path, lock, points, grasps_in;
  std::string frame = "local", hand = "right";
  std::vector<std::string> logs;
  std::vector<double> bounds = {-0.1, -0.7, -0.5, 0.7, 0.3, 0.5};
  std::vector<double> band = {0.05, 0.15};
  double resolution = 0.02, table_height = 0.0;
  bool with_scale = false;

  auto* collect = app.add_subcommand("collect", "drive the plant through goals and record a dataset");
  add_common(collect, common);
  collect->add_option("--plant", plant_path, "plant file (default: calibrate from the config)");

  auto* train_fk = app.add_subcommand("train-fk", "train the end-effector correction model");
  auto* train_odom = app.add_subcommand("train-odom", "train the odometry correction model");
  for (auto* sub : {train_fk, train_odom}) {
    add_common(sub, common);
    sub->add_option("--data", data, "dataset JSONL")->required();
    sub->add_option("--ablate", ablations, "key=on|off switch (repeatable)");
  }

  auto* track = app.add_subcommand("track", "run reaching episodes and write rollout logs");
  add_common(track, common);
  track->add_option("--ablate", ablations, "key=on|off switch (repeatable)");
  track->add_option("--plant", plant_path, "plant file (default: calibrate from the config)");
  track->add_option("--fk-model", fk_path, "end-effector checkpoint");
  track->add_option("--odom-model", odom_path, "odometry checkpoint");
  track->add_option("--name", name, "name of this configuration in the logs");

  auto* eval = app.add_subcommand("eval", "aggregate rollout logs into metrics");
  add_common(eval, common);
  eval->add_option("--logs", logs, "log files or directories")->required();
  eval->add_option("--robots", robots, "robot directory, enables the joint-limit reward term");

  auto* workspace = app.add_subcommand("workspace", "voxel estimate of the reachable workspace");
  add_common(workspace, common);
  workspace->add_option("--chain", chain_path, "chain file (default: the humanoid arm)");
  workspace->add_option("--lock", lock, "comma-separated joints to lock at zero for a second map");
  workspace->add_option("--bounds", bounds, "x0 y0 z0 x1 y1 z1 in meters")->expected(6);
  workspace->add_option("--resolution", resolution, "voxel edge in meters");

  auto* calibrate = app.add_subcommand("calibrate", "rigid alignment of corresponded point sets");
  add_common(calibrate, common);
  calibrate->add_option("--points", points, "CSV with sx,sy,sz,dx,dy,dz rows")->required();
  calibrate->add_flag("--with-scale", with_scale, "also estimate a uniform scale");

  auto* retarget = app.add_subcommand("retarget", "filter and retarget grasp candidates for the hand");
  add_common(retarget, common);
  retarget->add_option("--grasps", grasps_in, "grasp JSONL")->required();
  retarget->add_option("--offset-frame", frame, "local or base");
  retarget->add_option("--hand", hand, "left or right");
  auto* table_opt = retarget->add_option("--table-height", table_height, "table top height, enables filtering");
  retarget->add_option("--band", band, "height band above the table")->expected(2);

  auto* calibrate_plant = app.add_subcommand("calibrate-plant", "scale the plant error model to its targets");
  add_common(calibrate_plant, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigExit;
  }

  try {
    if (*collect) return cmd_collect(common, plant_path);
    if (*train_fk) return cmd_train(common, data, ablations, ModelRole::kEndEffector);
    if (*train_odom) return cmd_train(common, data, ablations, ModelRole::kOdometry);
    if (*track) return cmd_track(common, ablations, plant_path, fk_path, odom_path, name);
    if (*eval) return cmd_eval(common, logs, robots);
    if (*workspace) return cmd_workspace(common, chain_path, lock, bounds, resolution);
    if (*calibrate) return cmd_calibrate(common, points, with_scale);
    if (*retarget) return cmd_retarget(common, grasps_in, frame, hand, table_height, band, table_opt->count() > 0);
    if (*calibrate_plant) return cmd_calibrate_plant(common);
  } catch (const UpstreamMissing& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUpstreamExit;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigExit;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigExit;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigExit;
  } catch (const HashMismatch& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigExit;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntimeExit;
  }
  return kRuntimeExit;
}
