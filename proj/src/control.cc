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

#include "reach/control.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "reach/errors.h"

namespace reach {
namespace {

Eigen::Matrix<double, 6, 1> error_twist(const Mat3& goal_rot, const Pose& err) {
  Eigen::Matrix<double, 6, 1> e;
  e.head<3>() = goal_rot * err.translation();
  e.tail<3>() = goal_rot * log_so3(err.rotation_matrix());
  return e;
}

Pose lift(const Pose& p, double h) { return compose(p, Pose::FromTranslation(Vec3(0, 0, h))); }

}  // namespace

void GoalAdjustConfig::validate() const {
  if (!(alpha >= 1.0)) throw ConfigError("goal adjustment alpha must be >= 1");
  if (!(stop_thresh > 0.0 && stop_thresh < start_thresh)) {
    throw ConfigError("goal adjustment needs 0 < stop_thresh < start_thresh");
  }
}

Pose adjust_goal(const Pose& err, const GoalAdjustConfig& cfg) {
  if (!adjust_active(err, cfg)) return err;
  return Pose(cfg.alpha * err.translation(), err.rotation());
}

JointVector executor_command(const Robot& robot, const JointVector& q_ref,
                             const JointVector& x_meas, const Pose& goal,
                             const Pose& err_estimate, const Pose& err_reference,
                             const ExecutorConfig& cfg, ExecutorState& state) {
  const int na = robot.arm_dof();
  const Mat3 rg = goal.rotation_matrix();
  Eigen::Matrix<double, 6, 1> de = error_twist(rg, err_estimate) - error_twist(rg, err_reference);
  double lin = de.head<3>().norm();
  if (lin > cfg.max_correction_m) de.head<3>() *= cfg.max_correction_m / lin;
  double ang = de.tail<3>().norm();
  if (ang > cfg.max_correction_rad) de.tail<3>() *= cfg.max_correction_rad / ang;

  Jacobian j = jacobian(robot.arm, x_meas);
  Eigen::Matrix<double, 6, 6> a = j * j.transpose();
  a.diagonal().array() += cfg.damping * cfg.damping;
  if (state.correction.size() != na) state.correction = Eigen::VectorXd::Zero(na);
  state.correction *= 1.0 - cfg.leak;
  state.correction -= cfg.gain * (j.transpose() * a.ldlt().solve(de));

  JointVector cmd = q_ref;
  cmd.tail(na) += state.correction;
  cmd = robot.planning.clamp(cmd);
  state.correction = cmd.tail(na) - q_ref.tail(na);
  return cmd;
}

const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kAnalytical:
      return "analytical";
    case EstimatorKind::kNeural:
      return "neural";
    case EstimatorKind::kMocap:
      return "mocap";
    case EstimatorKind::kOracle:
      return "oracle";
  }
  return "analytical";
}

EstimatorKind estimator_from_name(const std::string& name) {
  if (name == "analytical") return EstimatorKind::kAnalytical;
  if (name == "neural") return EstimatorKind::kNeural;
  if (name == "mocap") return EstimatorKind::kMocap;
  if (name == "oracle") return EstimatorKind::kOracle;
  throw ConfigError("unknown estimator '" + name + "'");
}

RolloutLog run_episode(const PlantModel& plant, const Estimators& est, const Pose& goal,
                       const JointVector& q0, const EpisodeConfig& cfg, int episode,
                       const TickObserver& observer) {
  const Robot& robot = *plant.robot;
  const int na = robot.arm_dof();
  if (est.ee == EstimatorKind::kNeural &&
      (!est.ee_model || est.ee_model->role != ModelRole::kEndEffector)) {
    throw ConfigError("neural end-effector estimator needs an end-effector model");
  }
  if (est.odom == EstimatorKind::kNeural &&
      (!est.odom_model || est.odom_model->role != ModelRole::kOdometry)) {
    throw ConfigError("neural odometry estimator needs an odometry model");
  }
  if (cfg.horizon <= 0 || cfg.replan_every <= 0) throw ConfigError("horizon and replan period must be positive");
  if (cfg.command_offset.size() != 0 && cfg.command_offset.size() != na) {
    throw ConfigError("command offset must match the arm size");
  }
  cfg.adjust.validate();

  RolloutLog log;
  RolloutHeader& h = log.header;
  h.episode = episode;
  h.goal = goal;
  h.chain_hash = robot.hash();
  h.plant_hash = plant.cfg.hash();
  h.seed = plant.cfg.seed;
  h.ee_estimator = estimator_name(est.ee);
  h.odom_estimator = estimator_name(est.odom);
  h.replan = cfg.replan;
  h.goal_adjust = cfg.goal_adjust;
  h.grasp = cfg.grasp;
  h.horizon = cfg.horizon;
  h.replan_every = cfg.replan_every;
  h.arm_dof = na;

  PlantState s = plant_reset(plant, q0, episode);
  const JointVector y0 = s.y_measured;
  const Pose base0_true = s.base_true;
  const Pose base0_mocap = mocap_read(plant, s).base;

  auto estimate = [&](const PlantState& st, Pose& ee, Pose& odom) {
    MocapReading m;
    if (est.ee == EstimatorKind::kMocap || est.odom == EstimatorKind::kMocap) {
      m = mocap_read(plant, st);
    }
    JointVector x = st.q_measured.tail(na);
    switch (est.ee) {
      case EstimatorKind::kAnalytical:
        ee = fk(robot.arm, x);
        break;
      case EstimatorKind::kNeural:
        ee = corrected_fk(*est.ee_model, robot.arm, x);
        break;
      case EstimatorKind::kMocap:
        ee = m.ee;
        break;
      case EstimatorKind::kOracle:
        ee = st.ee_true;
        break;
    }
    switch (est.odom) {
      case EstimatorKind::kAnalytical:
        odom = analytical_odometry(robot.leg, st.y_measured, y0);
        break;
      case EstimatorKind::kNeural:
        odom = corrected_odometry(*est.odom_model, robot.leg, st.y_measured, y0);
        break;
      case EstimatorKind::kMocap:
        odom = inv_compose(base0_mocap, m.base);
        break;
      case EstimatorKind::kOracle:
        odom = inv_compose(base0_true, st.base_true);
        break;
    }
  };

  Pose ee_est, odom_est;
  estimate(s, ee_est, odom_est);
  Pose goal_plan = lift(compose(goal, odom_est), s.q_measured[0]);
  ReferenceTrajectory traj = plan(robot.planning, s.q_measured, goal_plan, cfg.obstacles, cfg.planner);

  int k = 0;
  bool closed = false;
  ExecutorState exec;
  log.ticks.reserve(cfg.horizon);
  for (int t = 0; t < cfg.horizon; ++t) {
    if (observer) observer(plant, s);
    if (t > 0) estimate(s, ee_est, odom_est);
    const Pose goal_cur = compose(goal, odom_est);
    const Pose err_est = inv_compose(ee_est, goal_cur);

    bool replanned = false;
    if (cfg.replan && t > 0 && t % cfg.replan_every == 0 && !closed) {
      Pose target = lift(goal_cur, s.q_measured[0]);
      try {
        traj = plan(robot.planning, s.q_measured, target, cfg.obstacles, cfg.planner);
        goal_plan = target;
        k = 0;
        exec.correction.resize(0);
        replanned = true;
      } catch (const IkInfeasible&) {
        ++log.replan_failures;
      } catch (const PlanBlocked&) {
        ++log.replan_failures;
      }
    }
    const int idx = std::min(k, traj.horizon() - 1);
    const JointVector& q_ref = traj.waypoints[idx];
    const Pose err_ref = inv_compose(traj.ee_refs[idx], goal_plan);
    const bool adj = cfg.goal_adjust && adjust_active(err_est, cfg.adjust);
    const Pose err_in = cfg.goal_adjust ? adjust_goal(err_est, cfg.adjust) : err_est;

    if (cfg.grasp && !closed && err_est.translation().norm() <= cfg.grasp_thresh) closed = true;
    JointVector cmd = executor_command(robot, q_ref, s.q_measured.tail(na), goal_cur, err_in,
                                       err_ref, cfg.executor, exec);
    if (cfg.command_offset.size() == na) {
      cmd.tail(na) += cfg.command_offset;
      cmd = robot.planning.clamp(cmd);
    }

    TickRecord r;
    r.t = t;
    r.q_ref = q_ref;
    r.q_cmd = cmd;
    r.q_meas = s.q_measured;
    r.y_meas = s.y_measured;
    r.err_est = err_est;
    r.base_true = inv_compose(base0_true, s.base_true);
    r.err_true = inv_compose(s.ee_true, compose(goal, r.base_true));
    r.ee_est = ee_est;
    r.ee_true = s.ee_true;
    r.base_est = odom_est;
    r.replan = replanned;
    r.adjust = adj;
    r.grasp_closed = closed;
    log.ticks.push_back(std::move(r));

    s = plant_step(plant, s, cmd);
    if (!closed) ++k;
  }
  log.converged = log.ticks.back().err_true.translation().norm() <= cfg.grasp_thresh;
  return log;
}

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

}  // namespace

std::string rollout_to_jsonl(const RolloutLog& log) {
  const RolloutHeader& h = log.header;
  json head = {{"type", "rollout"},
               {"episode", h.episode},
               {"goal", pose_json(h.goal)},
               {"config", h.config_name},
               {"config_hash", hex64(h.config_hash)},
               {"seed", h.seed},
               {"chain_hash", hex64(h.chain_hash)},
               {"plant_hash", hex64(h.plant_hash)},
               {"ee_estimator", h.ee_estimator},
               {"odom_estimator", h.odom_estimator},
               {"replan", h.replan},
               {"goal_adjust", h.goal_adjust},
               {"grasp", h.grasp},
               {"horizon", h.horizon},
               {"replan_every", h.replan_every},
               {"arm_dof", h.arm_dof},
               {"converged", log.converged},
               {"replan_failures", log.replan_failures}};
  std::string out = head.dump() + "\n";
  for (const auto& r : log.ticks) {
    json j = {{"t", r.t},
              {"q_ref", vec_json(r.q_ref)},
              {"q_cmd", vec_json(r.q_cmd)},
              {"q_meas", vec_json(r.q_meas)},
              {"y_meas", vec_json(r.y_meas)},
              {"err_est", pose_json(r.err_est)},
              {"err_true", pose_json(r.err_true)},
              {"ee_est", pose_json(r.ee_est)},
              {"ee_true", pose_json(r.ee_true)},
              {"base_est", pose_json(r.base_est)},
              {"base_true", pose_json(r.base_true)},
              {"replan", r.replan},
              {"adjust", r.adjust},
              {"grasp_closed", r.grasp_closed}};
    out += j.dump() + "\n";
  }
  return out;
}

RolloutLog rollout_from_jsonl(const std::string& text) {
  RolloutLog log;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      if (!have_header) {
        if (j.at("type").get<std::string>() != "rollout") throw ConfigError("not a rollout log");
        RolloutHeader& h = log.header;
        h.episode = j.at("episode").get<int>();
        h.goal = pose_from(j.at("goal"));
        h.config_name = j.at("config").get<std::string>();
        h.config_hash = std::stoull(j.at("config_hash").get<std::string>(), nullptr, 16);
        h.seed = j.at("seed").get<std::uint64_t>();
        h.chain_hash = std::stoull(j.at("chain_hash").get<std::string>(), nullptr, 16);
        h.plant_hash = std::stoull(j.at("plant_hash").get<std::string>(), nullptr, 16);
        h.ee_estimator = j.at("ee_estimator").get<std::string>();
        h.odom_estimator = j.at("odom_estimator").get<std::string>();
        h.replan = j.at("replan").get<bool>();
        h.goal_adjust = j.at("goal_adjust").get<bool>();
        h.grasp = j.at("grasp").get<bool>();
        h.horizon = j.at("horizon").get<int>();
        h.replan_every = j.at("replan_every").get<int>();
        h.arm_dof = j.at("arm_dof").get<int>();
        log.converged = j.at("converged").get<bool>();
        log.replan_failures = j.at("replan_failures").get<int>();
        have_header = true;
        continue;
      }
      TickRecord r;
      r.t = j.at("t").get<int>();
      r.q_ref = vec_from(j.at("q_ref"));
      r.q_cmd = vec_from(j.at("q_cmd"));
      r.q_meas = vec_from(j.at("q_meas"));
      r.y_meas = vec_from(j.at("y_meas"));
      r.err_est = pose_from(j.at("err_est"));
      r.err_true = pose_from(j.at("err_true"));
      r.ee_est = pose_from(j.at("ee_est"));
      r.ee_true = pose_from(j.at("ee_true"));
      r.base_est = pose_from(j.at("base_est"));
      r.base_true = pose_from(j.at("base_true"));
      r.replan = j.at("replan").get<bool>();
      r.adjust = j.at("adjust").get<bool>();
      r.grasp_closed = j.at("grasp_closed").get<bool>();
      if (!log.ticks.empty() && r.t <= log.ticks.back().t) {
        throw ConfigError("tick indices must increase");
      }
      log.ticks.push_back(std::move(r));
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(lineno, 0, std::string("rollout log: ") + e.what());
    }
  }
  if (!have_header) throw ParseError(lineno, 0, "rollout log has no header");
  if (log.ticks.empty()) throw ParseError(lineno, 0, "rollout log has no ticks");
  return log;
}

}  // namespace reach
