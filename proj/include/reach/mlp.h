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

#ifndef REACH_MLP_H_
#define REACH_MLP_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace reach {

// Fully connected network with `hidden_layers` SiLU layers of equal width and
// two linear heads: a translation head (3) and a rotation head (6).
struct MlpShape {
  int inputs = 0;
  int width = 256;
  int hidden_layers = 3;

  static constexpr int kTransOutputs = 3;
  static constexpr int kRotOutputs = 6;
  static constexpr int kOutputs = kTransOutputs + kRotOutputs;

  std::string describe() const;
  std::uint64_t hash() const;
  std::size_t num_params() const;
};

class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(const MlpShape& shape);

  // Hidden layers U(-1/sqrt(fan_in), 1/sqrt(fan_in)); both heads zero.
  void init(std::uint64_t seed);

  const MlpShape& shape() const { return shape_; }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  // x: inputs x batch. Returns kOutputs x batch; rows 0-2 are the translation
  // head, rows 3-8 the rotation head.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& x) const;

  // Mean over the batch of MSE(translation head) + MSE(rotation head), each
  // MSE averaged over its components. Fills `grad` when non-null.
  double loss(const Eigen::MatrixXd& x, const Eigen::MatrixXd& target,
              Eigen::VectorXd* grad = nullptr) const;

 private:
  struct Layer {
    std::size_t w = 0;  // offset of the column-major weight block
    std::size_t b = 0;  // offset of the bias
    int rows = 0;
    int cols = 0;
  };
  using MapM = Eigen::Map<const Eigen::MatrixXd>;
  using MapV = Eigen::Map<const Eigen::VectorXd>;

  MapM weight(const Layer& l) const { return MapM(params_.data() + l.w, l.rows, l.cols); }
  MapV bias(const Layer& l) const { return MapV(params_.data() + l.b, l.rows); }

  MlpShape shape_;
  std::vector<Layer> layers_;  // hidden layers, then translation head, rotation head
  Eigen::VectorXd params_;
};

}  // namespace reach

#endif  // REACH_MLP_H_
