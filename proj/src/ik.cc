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

#include "reach/ik.h"

#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "reach/errors.h"

namespace reach {
namespace {

struct Residual {
  Eigen::Matrix<double, 6, 1> e;
  double trans = 0.0;
  double rot_deg = 0.0;
};

Residual residual(const Pose& current, const Pose& target, bool position_only) {
  Residual r;
  Vec3 dp = target.translation() - current.translation();
  r.e.head<3>() = dp;
  r.trans = dp.norm();
  if (position_only) {
    r.e.tail<3>().setZero();
  } else {
    Quat dq = target.rotation() * current.rotation().conjugate();
    if (dq.w() < 0) dq.coeffs() = -dq.coeffs();
    Eigen::AngleAxisd aa(dq);
    r.e.tail<3>() = aa.axis() * aa.angle();
    r.rot_deg = rad2deg(aa.angle());
  }
  return r;
}

bool good(const Residual& r, const IkConfig& cfg) {
  return r.trans < cfg.pos_tol && (cfg.position_only || r.rot_deg < cfg.rot_tol_deg);
}

double score(const Residual& r) { return r.trans + 0.01 * r.rot_deg; }

IkResult run_dls(const KinematicChain& chain, const Pose& target,
                 const JointVector& seed, const IkConfig& cfg) {
  const int n = chain.dof();
  JointVector q = chain.clamp(seed);
  const double lambda2 = cfg.damping * cfg.damping;

  IkResult best;
  best.q = q;
  Residual r = residual(fk(chain, q), target, cfg.position_only);
  double best_score = score(r);
  best.residual = {r.trans, r.rot_deg};
  best.converged = good(r, cfg);
  if (best.converged) return best;

  double window_ref = best_score;
  int since_ref = 0;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    Jacobian jac = jacobian(chain, q);
    for (int i = 0; i < n; ++i) {
      if (chain.joint(i).locked()) jac.col(i).setZero();
    }
    auto step = [&] {
      JointVector d;
      if (cfg.position_only) {
        Eigen::Matrix3d a = jac.topRows<3>() * jac.topRows<3>().transpose();
        a.diagonal().array() += lambda2;
        d = jac.topRows<3>().transpose() * a.ldlt().solve(r.e.head<3>());
      } else {
        Eigen::Matrix<double, 6, 6> a = jac * jac.transpose();
        a.diagonal().array() += lambda2;
        d = jac.transpose() * a.ldlt().solve(r.e);
      }
      return d;
    };
    JointVector dq = step();
    // Joints resting on a limit and pushed further out are dropped and the
    // step is solved again over the remaining joints.
    bool dropped = false;
    for (int i = 0; i < n; ++i) {
      const Joint& j = chain.joint(i);
      if ((q[i] <= j.lower && dq[i] < 0.0) || (q[i] >= j.upper && dq[i] > 0.0)) {
        jac.col(i).setZero();
        dropped = true;
      }
    }
    if (dropped) dq = step();
    double m = dq.cwiseAbs().maxCoeff();
    if (m > cfg.max_step) dq *= cfg.max_step / m;
    q = chain.clamp(q + dq);
    r = residual(fk(chain, q), target, cfg.position_only);
    best.iterations = it;
    double s = score(r);
    if (s < best_score) {
      best_score = s;
      best.q = q;
      best.residual = {r.trans, r.rot_deg};
    }
    if (good(r, cfg)) {
      best.q = q;
      best.residual = {r.trans, r.rot_deg};
      best.converged = true;
      return best;
    }
    if (cfg.stall_window > 0 && ++since_ref >= cfg.stall_window) {
      if (window_ref - best_score < cfg.stall_eps) break;
      window_ref = best_score;
      since_ref = 0;
    }
  }
  best.hit_max_iterations = best.iterations >= cfg.max_iterations;
  return best;
}

double score(const PoseError& e) { return e.trans_err + 0.01 * e.rot_err; }

}  // namespace

std::vector<JointVector> spread_seeds(const KinematicChain& chain, int count) {
  std::vector<JointVector> seeds;
  seeds.push_back(chain.clamp(JointVector::Zero(chain.dof())));
  // Van der Corput fractions, with a different shift per joint.
  auto vdc = [](unsigned k) {
    double f = 0.0, base = 0.5;
    while (k) {
      if (k & 1u) f += base;
      base *= 0.5;
      k >>= 1u;
    }
    return f;
  };
  for (int s = 1; s < count; ++s) {
    JointVector q(chain.dof());
    for (int j = 0; j < chain.dof(); ++j) {
      double f = std::fmod(vdc(static_cast<unsigned>(s)) + 0.382 * j, 1.0);
      f = 0.1 + 0.8 * f;
      q[j] = chain.joint(j).lower + f * (chain.joint(j).upper - chain.joint(j).lower);
    }
    seeds.push_back(q);
  }
  return seeds;
}

IkResult solve_ik(const KinematicChain& chain, const Pose& target,
                  const JointVector& seed, const IkConfig& cfg) {
  if (seed.size() != chain.dof()) throw Error("IK seed length mismatch");
  IkResult best = run_dls(chain, target, seed, cfg);
  if (best.converged || cfg.restarts <= 0) return best;
  int total = best.iterations;
  bool hit_max = best.hit_max_iterations;
  const auto seeds = spread_seeds(chain, cfg.restarts + 1);
  for (int k = 1; k <= cfg.restarts; ++k) {
    IkResult r = run_dls(chain, target, seeds[k], cfg);
    total += r.iterations;
    hit_max = hit_max || r.hit_max_iterations;
    if (r.converged || score(r.residual) < score(best.residual)) best = r;
    if (best.converged) break;
  }
  best.iterations = total;
  best.hit_max_iterations = hit_max;
  return best;
}

}  // namespace reach
