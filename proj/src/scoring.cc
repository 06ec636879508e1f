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

#include "reach/scoring.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "reach/errors.h"

namespace reach {
namespace {

const char* const kUnavailable[] = {
    "termination", "torque",        "base_orientation",   "torso_orientation",
    "stance_symmetry", "ankle_roll", "feet_contact",      "feet_orientation",
    "negative_knee", "locomotion_tracking",
};

double ee_error_sq(const Pose& err) {
  Rot6D r = rot6d_from_pose(err);
  Rot6D id = rot6d_from_rotation(Mat3::Identity());
  return err.translation().squaredNorm() + (r.a - id.a).squaredNorm() + (r.b - id.b).squaredNorm();
}

Vec3 angular_rate(const Pose& prev, const Pose& cur, double dt) {
  return log_so3((prev.rotation().conjugate() * cur.rotation()).toRotationMatrix()) / dt;
}

}  // namespace

const RewardTerm& RewardBreakdown::term(const std::string& name) const {
  for (const auto& t : terms)
    if (t.name == name) return t;
  throw Error("no reward term '" + name + "'");
}

RewardBreakdown score_rollout(const RolloutLog& log, const RewardWeights& w,
                              const KinematicChain* planning) {
  const auto& ticks = log.ticks;
  const int n = static_cast<int>(ticks.size());
  const int na = log.header.arm_dof;
  const double dt = w.dt;

  double ee = 0, upper = 0, height = 0, pos_lim = 0, vel_lim = 0, ee_v = 0, ee_w = 0, acc = 0,
         vel = 0, rate = 0, base_v = 0, base_w = 0;
  for (int i = 0; i < n; ++i) {
    const TickRecord& r = ticks[i];
    const int nq = static_cast<int>(r.q_meas.size());
    ee += std::exp(-ee_error_sq(r.err_true));
    upper += std::exp(-(r.q_ref.tail(na) - r.q_meas.tail(na)).squaredNorm());
    double dh = r.q_meas[0] - r.q_ref[0];
    height += std::exp(-dh * dh);
    if (planning) {
      bool out = false;
      for (int j = 0; j < nq; ++j) {
        const Joint& jt = planning->joint(j);
        out = out || r.q_meas[j] < jt.lower || r.q_meas[j] > jt.upper;
      }
      pos_lim += out ? 1.0 : 0.0;
    }
    if (i >= 1) {
      const TickRecord& p = ticks[i - 1];
      Eigen::VectorXd qd = (r.q_meas - p.q_meas) / dt;
      vel += qd.squaredNorm();
      vel_lim += (qd.cwiseAbs().maxCoeff() > w.velocity_limit) ? 1.0 : 0.0;
      ee_v += ((r.ee_true.translation() - p.ee_true.translation()) / dt).squaredNorm();
      ee_w += angular_rate(p.ee_true, r.ee_true, dt).squaredNorm();
      rate += (r.q_cmd - p.q_cmd).squaredNorm();
      // base_true holds the starting base in the current base frame; its
      // inverse is the current base in the starting frame.
      Pose bp = inv_compose(Pose(), p.base_true), bc = inv_compose(Pose(), r.base_true);
      base_v += ((bc.translation() - bp.translation()) / dt).squaredNorm();
      base_w += angular_rate(bp, bc, dt).squaredNorm();
    }
    if (i >= 2) {
      const TickRecord& pp = ticks[i - 2];
      const TickRecord& p = ticks[i - 1];
      acc += ((r.q_meas - 2.0 * p.q_meas + pp.q_meas) / (dt * dt)).norm();
    }
  }

  RewardBreakdown out;
  auto add = [&](const char* name, double weight, bool available, double sum) {
    RewardTerm t{name, weight, available, available ? sum : 0.0, available ? weight * sum : 0.0};
    if (available) out.total += t.weighted;
    out.terms.push_back(t);
  };
  add("ee_exp", w.ee_exp, true, ee);
  add("upper_dof_exp", w.upper_dof_exp, true, upper);
  add("base_height_exp", w.base_height_exp, true, height);
  add("position_limits", w.position_limits, planning != nullptr, pos_lim);
  add("velocity_limits", w.velocity_limits, true, vel_lim);
  add("ee_linear_velocity", w.ee_linear_velocity, true, ee_v);
  add("ee_angular_velocity", w.ee_angular_velocity, true, ee_w);
  add("dof_acceleration", w.dof_acceleration, true, acc);
  add("dof_velocity", w.dof_velocity, true, vel);
  add("action_rate", w.action_rate, true, rate);
  add("base_velocity", w.base_velocity, true, base_v);
  add("base_angular_velocity", w.base_angular_velocity, true, base_w);
  for (const char* name : kUnavailable) add(name, 0.0, false, 0.0);
  return out;
}

Metrics compute_metrics(const std::vector<RolloutLog>& logs) {
  if (logs.empty()) throw Error("metrics need at least one rollout");
  Metrics m;
  m.n = static_cast<int>(logs.size());
  std::vector<double> trans, rot;
  double joint = 0.0;
  for (const auto& log : logs) {
    if (log.ticks.empty()) throw Error("rollout has no ticks");
    const TickRecord& last = log.ticks.back();
    trans.push_back(100.0 * last.err_true.translation().norm());
    rot.push_back(rad2deg(rotation_angle(last.err_true.rotation())));
    const int na = log.header.arm_dof;
    joint += (last.q_ref.tail(na) - last.q_meas.tail(na)).cwiseAbs().mean();
  }
  auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
    double s = 0.0;
    for (double x : v) s += x;
    mean = s / v.size();
    double q = 0.0;
    for (double x : v) q += (x - mean) * (x - mean);
    sd = std::sqrt(q / v.size());
  };
  mean_std(trans, m.trans_mean_cm, m.trans_std_cm);
  mean_std(rot, m.rot_mean_deg, m.rot_std_deg);
  m.joint_err_rad = joint / m.n;

  std::sort(trans.begin(), trans.end());
  std::sort(rot.begin(), rot.end());
  for (int p = 0; p <= 100; ++p) {
    int idx = static_cast<int>(std::ceil(p / 100.0 * m.n - 1e-9)) - 1;
    idx = std::clamp(idx, 0, m.n - 1);
    m.cdf.push_back({p, trans[idx], rot[idx]});
  }
  return m;
}

std::string metrics_csv(const std::vector<std::pair<std::string, Metrics>>& rows) {
  std::string out = "config,n,trans_mean_cm,trans_std_cm,rot_mean_deg,rot_std_deg,joint_err_rad\n";
  char buf[256];
  for (const auto& [name, m] : rows) {
    std::snprintf(buf, sizeof(buf), ",%d,%.6f,%.6f,%.6f,%.6f,%.6f\n", m.n, m.trans_mean_cm,
                  m.trans_std_cm, m.rot_mean_deg, m.rot_std_deg, m.joint_err_rad);
    out += name + buf;
  }
  return out;
}

std::string cdf_csv(const Metrics& m) {
  std::string out = "percentile,trans_cm,rot_deg\n";
  char buf[128];
  for (const auto& r : m.cdf) {
    std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f\n", r.percentile, r.trans_cm, r.rot_deg);
    out += buf;
  }
  return out;
}

}  // namespace reach
