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

#include "reach/mlp.h"

#include <cmath>
#include <random>

#include "reach/chain.h"
#include "reach/errors.h"

namespace reach {
namespace {

Eigen::MatrixXd silu(const Eigen::MatrixXd& z) {
  return z.array() / (1.0 + (-z.array()).exp());
}

Eigen::MatrixXd silu_grad(const Eigen::MatrixXd& z) {
  Eigen::ArrayXXd s = 1.0 / (1.0 + (-z.array()).exp());
  return (s * (1.0 + z.array() * (1.0 - s))).matrix();
}

}  // namespace

std::string MlpShape::describe() const {
  return "mlp(inputs=" + std::to_string(inputs) + ",width=" + std::to_string(width) +
         ",hidden=" + std::to_string(hidden_layers) + ",act=silu,heads=3+6)";
}

std::uint64_t MlpShape::hash() const { return fnv1a(describe()); }

std::size_t MlpShape::num_params() const {
  std::size_t n = static_cast<std::size_t>(width) * (inputs + 1);
  n += static_cast<std::size_t>(hidden_layers - 1) * width * (width + 1);
  n += static_cast<std::size_t>(kOutputs) * (width + 1);
  return n;
}

Mlp::Mlp(const MlpShape& shape) : shape_(shape) {
  if (shape.inputs <= 0 || shape.width <= 0 || shape.hidden_layers <= 0) {
    throw ConfigError("invalid network shape " + shape.describe());
  }
  std::size_t off = 0;
  auto add = [&](int rows, int cols) {
    Layer l;
    l.rows = rows;
    l.cols = cols;
    l.w = off;
    off += static_cast<std::size_t>(rows) * cols;
    l.b = off;
    off += rows;
    layers_.push_back(l);
  };
  add(shape.width, shape.inputs);
  for (int i = 1; i < shape.hidden_layers; ++i) add(shape.width, shape.width);
  add(MlpShape::kTransOutputs, shape.width);
  add(MlpShape::kRotOutputs, shape.width);
  params_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(off));
}

void Mlp::init(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  params_.setZero();
  const std::size_t hidden = layers_.size() - 2;
  for (std::size_t i = 0; i < hidden; ++i) {
    const Layer& l = layers_[i];
    double bound = 1.0 / std::sqrt(static_cast<double>(l.cols));
    std::uniform_real_distribution<double> u(-bound, bound);
    for (std::size_t k = l.w; k < l.b + l.rows; ++k) params_[k] = u(rng);
  }
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& x) const {
  if (x.rows() != shape_.inputs) throw Error("network input has wrong size");
  const std::size_t hidden = layers_.size() - 2;
  Eigen::MatrixXd a = x;
  for (std::size_t i = 0; i < hidden; ++i) {
    Eigen::MatrixXd z = weight(layers_[i]) * a;
    z.colwise() += bias(layers_[i]);
    a = silu(z);
  }
  Eigen::MatrixXd y(MlpShape::kOutputs, x.cols());
  const Layer& ht = layers_[hidden];
  const Layer& hr = layers_[hidden + 1];
  y.topRows(MlpShape::kTransOutputs) = (weight(ht) * a).colwise() + bias(ht);
  y.bottomRows(MlpShape::kRotOutputs) = (weight(hr) * a).colwise() + bias(hr);
  return y;
}

double Mlp::loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& target,
                 Eigen::VectorXd* grad) const {
  if (x.rows() != shape_.inputs || target.rows() != MlpShape::kOutputs ||
      target.cols() != x.cols()) {
    throw Error("network batch has wrong shape");
  }
  const double batch = static_cast<double>(x.cols());
  const std::size_t hidden = layers_.size() - 2;
  std::vector<Eigen::MatrixXd> zs(hidden), as(hidden + 1);
  as[0] = x;
  for (std::size_t i = 0; i < hidden; ++i) {
    zs[i] = weight(layers_[i]) * as[i];
    zs[i].colwise() += bias(layers_[i]);
    as[i + 1] = silu(zs[i]);
  }
  const Layer& ht = layers_[hidden];
  const Layer& hr = layers_[hidden + 1];
  Eigen::MatrixXd et = ((weight(ht) * as[hidden]).colwise() + bias(ht)) -
                       target.topRows(MlpShape::kTransOutputs);
  Eigen::MatrixXd er = ((weight(hr) * as[hidden]).colwise() + bias(hr)) -
                       target.bottomRows(MlpShape::kRotOutputs);
  const double nt = MlpShape::kTransOutputs * batch;
  const double nr = MlpShape::kRotOutputs * batch;
  double value = et.squaredNorm() / nt + er.squaredNorm() / nr;
  if (!grad) return value;

  grad->setZero(params_.size());
  auto gw = [&](const Layer& l) {
    return Eigen::Map<Eigen::MatrixXd>(grad->data() + l.w, l.rows, l.cols);
  };
  auto gb = [&](const Layer& l) { return Eigen::Map<Eigen::VectorXd>(grad->data() + l.b, l.rows); };

  Eigen::MatrixXd dt = (2.0 / nt) * et;
  Eigen::MatrixXd dr = (2.0 / nr) * er;
  gw(ht).noalias() = dt * as[hidden].transpose();
  gb(ht) = dt.rowwise().sum();
  gw(hr).noalias() = dr * as[hidden].transpose();
  gb(hr) = dr.rowwise().sum();
  Eigen::MatrixXd da = weight(ht).transpose() * dt;
  da.noalias() += weight(hr).transpose() * dr;
  for (std::size_t i = hidden; i-- > 0;) {
    Eigen::MatrixXd dz = da.cwiseProduct(silu_grad(zs[i]));
    gw(layers_[i]).noalias() = dz * as[i].transpose();
    gb(layers_[i]) = dz.rowwise().sum();
    if (i > 0) da.noalias() = weight(layers_[i]).transpose() * dz;
  }
  return value;
}

}  // namespace reach
