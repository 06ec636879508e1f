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

#include "reach/kabsch.h"

#include <cmath>

#include <Eigen/SVD>

#include "reach/errors.h"

namespace reach {

Alignment kabsch_umeyama(const Correspondences& c, bool with_scale) {
  const std::size_t n = c.src.size();
  if (n != c.dst.size()) throw DegenerateInput("src and dst differ in length");
  if (n < 3) throw DegenerateInput("need at least 3 correspondences");

  Vec3 mu_s = Vec3::Zero(), mu_d = Vec3::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    mu_s += c.src[i];
    mu_d += c.dst[i];
  }
  mu_s /= static_cast<double>(n);
  mu_d /= static_cast<double>(n);

  Mat3 cov = Mat3::Zero();
  Mat3 src_scatter = Mat3::Zero();
  double var_s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 s = c.src[i] - mu_s;
    Vec3 d = c.dst[i] - mu_d;
    cov += d * s.transpose();
    src_scatter += s * s.transpose();
    var_s += s.squaredNorm();
  }
  cov /= static_cast<double>(n);
  var_s /= static_cast<double>(n);

  Eigen::JacobiSVD<Mat3> src_svd(src_scatter);
  const auto& sv = src_svd.singularValues();
  if (!(sv[0] > 0.0) || sv[1] <= 1e-12 * sv[0]) {
    throw DegenerateInput("source points are collinear");
  }

  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  Mat3 v = svd.matrixV();
  Vec3 d = Vec3::Ones();
  if (u.determinant() * v.determinant() < 0.0) d[2] = -1.0;
  Mat3 r = u * d.asDiagonal() * v.transpose();

  double scale = 1.0;
  if (with_scale) scale = svd.singularValues().dot(d) / var_s;
  Vec3 t = mu_d - scale * r * mu_s;

  double sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sq += (scale * r * c.src[i] + t - c.dst[i]).squaredNorm();
  }
  Alignment out;
  out.pose = Pose(t, r);
  out.scale = scale;
  out.rmse = std::sqrt(sq / static_cast<double>(n));
  return out;
}

}  // namespace reach
