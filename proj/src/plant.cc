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

#include "reach/plant.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <json.hpp>

#include "reach/errors.h"
#include "reach/ik.h"

namespace reach {
namespace {

bool all_finite(const Eigen::VectorXd& v) { return v.array().isFinite().all(); }

void check_errors(const JointErrors& e, const KinematicChain& chain, const char* which) {
  const int n = chain.dof();
  if (e.bias.size() != n || e.elasticity.size() != n || e.link_scale.size() != n + 1) {
    throw ConfigError(std::string(which) + " error terms do not match the chain size");
  }
  if (!all_finite(e.bias) || !all_finite(e.elasticity) || !all_finite(e.link_scale)) {
    throw ConfigError(std::string(which) + " error terms must be finite");
  }
  if ((e.link_scale.array() <= 0.0).any()) {
    throw ConfigError(std::string(which) + " link scales must be positive");
  }
}

IkConfig leg_solver() {
  IkConfig c;
  c.damping = 1e-6;
  c.pos_tol = 1e-11;
  c.rot_tol_deg = 1e-9;
  c.max_iterations = 60;
  c.max_step = 0.5;
  c.stall_window = 0;
  c.restarts = 0;
  return c;
}

struct LegSolution {
  JointVector y_measured;
  JointVector y_true;
  Pose base_true;
};

// Places the pelvis at `pelvis` with the true leg, then recovers what the
// encoders read there.
LegSolution solve_leg(const Robot& robot, const KinematicChain& leg_true,
                      const JointErrors& err, const Pose& pelvis,
                      const JointVector& warm) {
  static const IkConfig cfg = leg_solver();
  IkResult ik = solve_ik(leg_true, robot.ankle_world.inverse() * pelvis, warm, cfg);
  LegSolution s;
  JointVector y = ik.q - err.bias;
  for (int i = 0; i < 30; ++i) {
    JointVector next = ik.q - err.bias - err.elasticity.cwiseProduct(gravity_load(robot.leg, y));
    double change = (next - y).cwiseAbs().maxCoeff();
    y = next;
    if (change < 1e-15) break;
  }
  s.y_measured = y;
  s.y_true = err.true_angles(robot.leg, y);
  s.base_true = robot.ankle_world * fk(leg_true, s.y_true);
  return s;
}

Pose pelvis_target(const PlantModel& m, double h, const Eigen::Vector2d& offset) {
  const PlantConfig& c = m.cfg;
  Mat3 tilt = axis_angle(Vec3::UnitY(), c.sway_tilt * offset.x()) *
              axis_angle(Vec3::UnitX(), -c.sway_tilt * offset.y());
  return Pose(Vec3(offset.x(), offset.y(), m.robot->pelvis_height + h), tilt);
}

Eigen::Vector2d oscillation(const PlantConfig& c, int t) {
  if (c.sway_amplitude == 0.0) return Eigen::Vector2d::Zero();
  double w = 2.0 * kPi * t * c.dt / c.sway_period;
  return c.sway_amplitude * Eigen::Vector2d(std::sin(w), 0.5 * std::sin(w / 1.37 + 1.0));
}

Eigen::Vector2d sway_target(const PlantModel& m, const Pose& ee_true) {
  Eigen::Vector2d ext = (ee_true.translation() - m.hanging_ee).head<2>();
  return -m.cfg.sway_gain * ext;
}

void settle(const PlantModel& m, PlantState& s, const JointVector& warm_leg) {
  const int na = m.robot->arm_dof();
  JointVector x = s.q_measured.tail(na);
  s.q_true = s.q_measured;
  s.q_true.tail(na) = m.cfg.arm.true_angles(m.robot->arm, x);
  s.ee_true = fk(m.arm_true, s.q_true.tail(na));
  Pose pelvis = pelvis_target(m, s.q_true[0], s.sway + oscillation(m.cfg, s.t));
  LegSolution leg = solve_leg(*m.robot, m.leg_true, m.cfg.leg, pelvis, warm_leg);
  s.y_measured = leg.y_measured;
  s.y_true = leg.y_true;
  s.base_true = leg.base_true;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

Pose perturb(const Pose& p, double sigma_t, double sigma_r, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 dt(n(rng), n(rng), n(rng));
  Vec3 dr(n(rng), n(rng), n(rng));
  Vec3 t = p.translation() + sigma_t * dt;
  Vec3 w = sigma_r * dr;
  double angle = w.norm();
  Mat3 r = p.rotation_matrix();
  if (angle > 0.0) r = r * axis_angle(w / angle, angle);
  return Pose(t, r);
}

}  // namespace

JointErrors JointErrors::Zero(int dof) {
  JointErrors e;
  e.bias = Eigen::VectorXd::Zero(dof);
  e.elasticity = Eigen::VectorXd::Zero(dof);
  e.link_scale = Eigen::VectorXd::Ones(dof + 1);
  return e;
}

JointErrors JointErrors::scaled(double s) const {
  JointErrors e;
  e.bias = s * bias;
  e.elasticity = s * elasticity;
  e.link_scale = Eigen::VectorXd::Ones(link_scale.size()) +
                 s * (link_scale - Eigen::VectorXd::Ones(link_scale.size()));
  return e;
}

Eigen::VectorXd JointErrors::true_angles(const KinematicChain& chain,
                                         const Eigen::VectorXd& q) const {
  return q + bias + elasticity.cwiseProduct(gravity_load(chain, q));
}

void PlantConfig::validate(const Robot& robot) const {
  check_errors(arm, robot.arm, "arm");
  check_errors(leg, robot.leg, "leg");
  if (!(lag > 0.0 && lag <= 1.0)) throw ConfigError("lag must lie in (0, 1]");
  if (!(mocap_noise_sigma >= 0.0) || !(mocap_rot_sigma >= 0.0)) {
    throw ConfigError("mocap noise must be non-negative");
  }
  for (double v : {sway_amplitude, sway_gain, sway_tilt}) {
    if (!std::isfinite(v)) throw ConfigError("sway parameters must be finite");
  }
  if (!(sway_period > 0.0) || !(sway_time_constant > 0.0) || !(dt > 0.0)) {
    throw ConfigError("sway period, time constant and dt must be positive");
  }
}

std::uint64_t PlantConfig::hash() const {
  std::string s;
  char buf[40];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g,", v);
    s += buf;
  };
  for (const JointErrors* e : {&arm, &leg}) {
    for (double v : e->bias) put(v);
    for (double v : e->elasticity) put(v);
    for (double v : e->link_scale) put(v);
  }
  for (double v : {mocap_noise_sigma, mocap_rot_sigma, sway_amplitude, sway_period,
                   sway_gain, sway_time_constant, sway_tilt, lag, dt}) {
    put(v);
  }
  s += std::to_string(seed);
  return fnv1a(s);
}

PlantConfig PlantConfig::Ideal(const Robot& robot) {
  PlantConfig c;
  c.arm = JointErrors::Zero(robot.arm.dof());
  c.leg = JointErrors::Zero(robot.leg.dof());
  c.mocap_noise_sigma = 0.0;
  c.mocap_rot_sigma = 0.0;
  c.sway_amplitude = 0.0;
  c.sway_gain = 0.0;
  c.sway_tilt = 0.0;
  c.lag = 1.0;
  return c;
}

PlantConfig PlantConfig::DefaultShape(const Robot& robot) {
  PlantConfig c;
  if (robot.arm.dof() != 10 || robot.leg.dof() != 6) {
    throw ConfigError("default error shape expects a 10-joint arm and 6-joint leg");
  }
  c.arm.bias.resize(10);
  c.arm.bias << 0.004, -0.006, 0.005, -0.010, 0.008, -0.006, 0.012, 0.007, -0.009, 0.006;
  c.arm.elasticity.resize(10);
  c.arm.elasticity << 0.010, 0.015, 0.015, 0.030, 0.025, 0.010, 0.025, 0.010, 0.015, 0.010;
  c.arm.link_scale.resize(11);
  c.arm.link_scale << 1.0, 1.01, 0.99, 1.02, 1.0, 0.985, 1.015, 1.0, 1.01, 0.99, 1.02;
  c.leg.bias.resize(6);
  c.leg.bias << 0.003, -0.004, 0.006, -0.005, 0.004, -0.003;
  c.leg.elasticity.resize(6);
  c.leg.elasticity << 0.010, 0.040, 0.050, 0.040, 0.010, 0.005;
  c.leg.link_scale.resize(7);
  c.leg.link_scale << 1.0, 1.0, 1.01, 0.99, 1.0, 1.0, 1.02;
  return c;
}

namespace {

nlohmann::json errors_json(const JointErrors& e) {
  auto v = [](const Eigen::VectorXd& x) { return std::vector<double>(x.data(), x.data() + x.size()); };
  return {{"bias", v(e.bias)}, {"elasticity", v(e.elasticity)}, {"link_scale", v(e.link_scale)}};
}

JointErrors errors_from(const nlohmann::json& j) {
  auto v = [](const nlohmann::json& a) {
    std::vector<double> d = a.get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(d.data(), static_cast<Eigen::Index>(d.size())));
  };
  JointErrors e;
  e.bias = v(j.at("bias"));
  e.elasticity = v(j.at("elasticity"));
  e.link_scale = v(j.at("link_scale"));
  return e;
}

}  // namespace

std::string plant_config_to_json(const Robot& robot, const PlantConfig& c) {
  nlohmann::json j = {{"format", "residual-reach-plant/1"},
                      {"robot_hash", hex64(robot.hash())},
                      {"plant_hash", hex64(c.hash())},
                      {"arm", errors_json(c.arm)},
                      {"leg", errors_json(c.leg)},
                      {"mocap_noise_sigma", c.mocap_noise_sigma},
                      {"mocap_rot_sigma", c.mocap_rot_sigma},
                      {"sway_amplitude", c.sway_amplitude},
                      {"sway_period", c.sway_period},
                      {"sway_gain", c.sway_gain},
                      {"sway_time_constant", c.sway_time_constant},
                      {"sway_tilt", c.sway_tilt},
                      {"lag", c.lag},
                      {"dt", c.dt},
                      {"seed", c.seed}};
  return j.dump(2) + "\n";
}

PlantConfig plant_config_from_json(const Robot& robot, const std::string& text) {
  PlantConfig c;
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "residual-reach-plant/1") {
      throw ConfigError("unsupported plant file format");
    }
    if (j.at("robot_hash").get<std::string>() != hex64(robot.hash())) {
      throw HashMismatch("plant file was made for a different robot");
    }
    c.arm = errors_from(j.at("arm"));
    c.leg = errors_from(j.at("leg"));
    c.mocap_noise_sigma = j.at("mocap_noise_sigma").get<double>();
    c.mocap_rot_sigma = j.at("mocap_rot_sigma").get<double>();
    c.sway_amplitude = j.at("sway_amplitude").get<double>();
    c.sway_period = j.at("sway_period").get<double>();
    c.sway_gain = j.at("sway_gain").get<double>();
    c.sway_time_constant = j.at("sway_time_constant").get<double>();
    c.sway_tilt = j.at("sway_tilt").get<double>();
    c.lag = j.at("lag").get<double>();
    c.dt = j.at("dt").get<double>();
    c.seed = j.at("seed").get<std::uint64_t>();
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("plant file: ") + e.what());
  }
  c.validate(robot);
  return c;
}

PlantModel::PlantModel(const Robot& r, PlantConfig c) : robot(&r), cfg(std::move(c)) {
  cfg.validate(r);
  arm_true = r.arm.with_link_scales(cfg.arm.link_scale);
  leg_true = r.leg.with_link_scales(cfg.leg.link_scale);
  hanging_ee = fk(r.arm, JointVector::Zero(r.arm.dof())).translation();
}

PlantState plant_reset(const PlantModel& m, const JointVector& q0, int episode) {
  if (q0.size() != m.robot->planning_dof()) throw Error("plant start vector has wrong size");
  if (!m.robot->planning.within_limits(q0, 1e-12)) {
    throw LimitViolation("plant start configuration outside joint limits");
  }
  PlantState s;
  s.episode = episode;
  s.q_commanded = q0;
  s.q_measured = q0;
  s.sway.setZero();
  settle(m, s, m.robot->leg_home);
  // start from the balanced posture for this arm configuration
  s.sway = sway_target(m, s.ee_true);
  settle(m, s, s.y_true);
  return s;
}

PlantState plant_step(const PlantModel& m, const PlantState& prev, const JointVector& cmd) {
  const KinematicChain& plan = m.robot->planning;
  if (cmd.size() != plan.dof()) throw Error("command vector has wrong size");
  if (!cmd.array().isFinite().all() || !plan.within_limits(cmd, 1e-9)) {
    throw LimitViolation("commanded joints outside limits");
  }
  PlantState s = prev;
  s.t = prev.t + 1;
  s.q_commanded = cmd;
  s.q_measured = prev.q_measured + m.cfg.lag * (cmd - prev.q_measured);
  double a = std::min(1.0, m.cfg.dt / m.cfg.sway_time_constant);
  s.sway = prev.sway + a * (sway_target(m, prev.ee_true) - prev.sway);
  settle(m, s, prev.y_true);
  return s;
}

MocapReading mocap_read(const PlantModel& m, const PlantState& s) {
  MocapReading r{s.ee_true, s.base_true};
  const PlantConfig& c = m.cfg;
  if (c.mocap_noise_sigma == 0.0 && c.mocap_rot_sigma == 0.0) return r;
  std::uint64_t key = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(s.episode)) << 32) |
                      static_cast<std::uint32_t>(s.t);
  std::mt19937_64 rng(mix(c.seed ^ mix(key)));
  r.ee = perturb(r.ee, c.mocap_noise_sigma, c.mocap_rot_sigma, rng);
  r.base = perturb(r.base, c.mocap_noise_sigma, c.mocap_rot_sigma, rng);
  return r;
}

Plant::Plant(const Robot& robot, PlantConfig cfg, const JointVector& q0)
    : model_(robot, std::move(cfg)), state_(plant_reset(model_, q0)) {}

const PlantState& Plant::step(const JointVector& cmd) {
  state_ = plant_step(model_, state_, cmd);
  return state_;
}

namespace {

double mean_ee_error(const Robot& robot, const JointErrors& err,
                     std::span<const CalibrationSample> samples) {
  KinematicChain arm_true = robot.arm.with_link_scales(err.link_scale);
  double sum = 0.0;
  for (const auto& s : samples) {
    Pose truth = fk(arm_true, err.true_angles(robot.arm, s.arm));
    sum += (truth.translation() - fk(robot.arm, s.arm).translation()).norm();
  }
  return sum / static_cast<double>(samples.size());
}

double mean_odom_error(const Robot& robot, const JointErrors& err,
                       std::span<const CalibrationSample> samples) {
  KinematicChain leg_true = robot.leg.with_link_scales(err.link_scale);
  double sum = 0.0;
  int n = 0;
  JointVector warm = robot.leg_home;
  Pose fk0, base0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    LegSolution leg = solve_leg(robot, leg_true, err, samples[i].pelvis, warm);
    warm = leg.y_true;
    Pose fk_now = fk(robot.leg, leg.y_measured);
    if (i == 0 || samples[i].episode != samples[i - 1].episode) {
      fk0 = fk_now;
      base0 = leg.base_true;
      continue;
    }
    Pose truth = inv_compose(base0, leg.base_true);
    Pose analytic = inv_compose(fk0, fk_now);
    sum += (truth.translation() - analytic.translation()).norm();
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

}  // namespace

CalibrationReport analytical_errors(const Robot& robot, const PlantConfig& cfg,
                                    std::span<const CalibrationSample> samples) {
  CalibrationReport rep;
  if (samples.empty()) return rep;
  rep.ee_mean = mean_ee_error(robot, cfg.arm, samples);
  rep.odom_mean = mean_odom_error(robot, cfg.leg, samples);
  return rep;
}

namespace {

// Smallest s >= 0 with f(s) = target for an increasing f with f(0) ~ 0.
template <typename F>
double solve_scale(F f, double target) {
  double lo = 0.0, hi = 1.0;
  int grow = 0;
  while (f(hi) < target) {
    lo = hi;
    hi *= 2.0;
    if (++grow > 30) throw ConfigError("calibration target unreachable");
  }
  for (int i = 0; i < 40; ++i) {
    double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

PlantConfig calibrate_plant(const Robot& robot, const PlantConfig& shape,
                            std::span<const CalibrationSample> samples,
                            const CalibrationTargets& targets, CalibrationReport* report) {
  if (samples.empty()) throw ConfigError("calibration needs samples");
  shape.validate(robot);
  PlantConfig out = shape;
  auto with = [&](double arm_s, double leg_s) {
    PlantConfig c = shape;
    c.arm = shape.arm.scaled(arm_s);
    c.leg = shape.leg.scaled(leg_s);
    return c;
  };
  double arm_s = solve_scale(
      [&](double s) { return mean_ee_error(robot, shape.arm.scaled(s), samples); },
      targets.ee_mean);
  double leg_s = solve_scale(
      [&](double s) { return mean_odom_error(robot, shape.leg.scaled(s), samples); },
      targets.odom_mean);
  out = with(arm_s, leg_s);
  if (report) {
    *report = analytical_errors(robot, out, samples);
    report->arm_scale = arm_s;
    report->leg_scale = leg_s;
  }
  return out;
}

}  // namespace reach
