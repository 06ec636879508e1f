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

#include "reach/residual.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <json.hpp>

#include "reach/errors.h"
#include "reach/io.h"

namespace reach {
namespace {

using Vec9 = Eigen::Matrix<double, 9, 1>;

constexpr char kFormat[] = "residual-reach-model/1";

Vec9 identity_code() {
  Vec9 v;
  v << 0, 0, 0, 1, 0, 0, 0, 1, 0;
  return v;
}

int role_inputs(ModelRole role) { return role == ModelRole::kEndEffector ? 19 : 21; }

// Root mean square of a block of rows around zero, floored away from zero.
double rms(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 1.0;
  double v = std::sqrt(m.squaredNorm() / static_cast<double>(m.size()));
  return v > 1e-12 ? v : 1.0;
}

Eigen::MatrixXd standardize(const ResidualModel& m, const Eigen::MatrixXd& x) {
  return ((x.colwise() - m.in_mean).array().colwise() / m.in_scale.array()).matrix();
}

Eigen::MatrixXd normalize_labels(const ResidualModel& m, const Eigen::MatrixXd& labels) {
  return ((labels.colwise() - m.out_offset).array().colwise() / m.out_scale.array()).matrix();
}

void fit_normalization(ResidualModel& m, const TrainingSet& train) {
  const double n = static_cast<double>(train.size());
  m.in_mean = train.features.rowwise().sum() / n;
  Eigen::MatrixXd centered = train.features.colwise() - m.in_mean;
  m.in_scale = (centered.array().square().rowwise().sum() / n).sqrt().matrix();
  for (Eigen::Index i = 0; i < m.in_scale.size(); ++i) {
    if (!(m.in_scale[i] > 1e-9)) m.in_scale[i] = 1.0;
  }
  m.out_offset = m.residual ? identity_code() : Vec9(train.labels.rowwise().sum() / n);
  Eigen::MatrixXd dev = train.labels.colwise() - m.out_offset;
  m.out_scale.head<3>().setConstant(rms(dev.topRows(3)));
  m.out_scale.tail<6>().setConstant(rms(dev.bottomRows(6)));
}

double batched_loss(const ResidualModel& m, const Eigen::MatrixXd& x,
                    const Eigen::MatrixXd& y) {
  const Eigen::Index chunk = 4096;
  double total = 0.0;
  for (Eigen::Index s = 0; s < x.cols(); s += chunk) {
    Eigen::Index len = std::min(chunk, x.cols() - s);
    total += m.net.loss(x.middleCols(s, len), y.middleCols(s, len)) * static_cast<double>(len);
  }
  return x.cols() > 0 ? total / static_cast<double>(x.cols()) : 0.0;
}

void check_set(const ResidualModel& m, const TrainingSet& s, const char* which) {
  if (s.features.rows() != m.inputs() || s.labels.rows() != 9 ||
      s.labels.cols() != s.features.cols()) {
    throw Error(std::string(which) + " set does not match the model inputs");
  }
}

}  // namespace

const char* role_name(ModelRole role) {
  return role == ModelRole::kEndEffector ? "end_effector" : "odometry";
}

ModelRole role_from_name(const std::string& name) {
  if (name == "end_effector") return ModelRole::kEndEffector;
  if (name == "odometry") return ModelRole::kOdometry;
  throw ConfigError("unknown model role '" + name + "'");
}

Eigen::Matrix<double, 9, 1> encode_pose(const Pose& p) {
  Vec9 v;
  v.head<3>() = p.translation();
  auto r = rot6d_from_pose(p).to_array();
  for (int i = 0; i < 6; ++i) v[3 + i] = r[i];
  return v;
}

Pose decode_pose(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() != 9) throw Error("pose code must have 9 entries");
  Rot6D r6;
  r6.a = v.segment<3>(3);
  r6.b = v.segment<3>(6);
  return Pose(Vec3(v.head<3>()), rotation_from_rot6d(r6));
}

Eigen::VectorXd fk_features(const JointVector& x, const Pose& fk_pose) {
  Eigen::VectorXd f(x.size() + 9);
  f << x, encode_pose(fk_pose);
  return f;
}

Eigen::VectorXd odometry_features(const JointVector& y_t, const JointVector& y_0,
                                  const Pose& odom) {
  Eigen::VectorXd f(y_t.size() + y_0.size() + 9);
  f << y_t, y_0, encode_pose(odom);
  return f;
}

std::uint64_t TrainConfig::hash() const {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d,%d,%d,%llu,%.17g,%.17g,%.17g", lr,
                weight_decay, batch, epochs, width, static_cast<unsigned long long>(seed),
                beta1, beta2, eps);
  return fnv1a(buf);
}

ResidualModel ResidualModel::Zero(ModelRole role, bool residual, int width,
                                  std::uint64_t seed) {
  ResidualModel m;
  m.role = role;
  m.residual = residual;
  MlpShape shape;
  shape.inputs = role_inputs(role);
  shape.width = width;
  m.net = Mlp(shape);
  m.net.init(seed);
  m.in_mean = Eigen::VectorXd::Zero(shape.inputs);
  m.in_scale = Eigen::VectorXd::Ones(shape.inputs);
  m.out_offset = identity_code();
  m.out_scale.setOnes();
  m.train_config.width = width;
  m.train_config.seed = seed;
  return m;
}

Pose ResidualModel::predict(const Eigen::VectorXd& features) const {
  Eigen::MatrixXd y = net.forward(standardize(*this, features));
  Vec9 code = out_offset + out_scale.cwiseProduct(Vec9(y.col(0)));
  return decode_pose(code);
}

std::vector<Pose> ResidualModel::predict_batch(const Eigen::MatrixXd& features) const {
  Eigen::MatrixXd y = net.forward(standardize(*this, features));
  std::vector<Pose> out;
  out.reserve(y.cols());
  for (Eigen::Index i = 0; i < y.cols(); ++i) {
    Vec9 code = out_offset + out_scale.cwiseProduct(Vec9(y.col(i)));
    out.push_back(decode_pose(code));
  }
  return out;
}

Pose corrected_fk(const ResidualModel& model, const KinematicChain& arm, const JointVector& x) {
  Pose analytic = fk(arm, x);
  Pose out = model.predict(fk_features(x, analytic));
  // compose(a, b) is M(b) * M(a): the correction acts in the base frame
  return model.residual ? compose(analytic, out) : out;
}

Pose analytical_odometry(const KinematicChain& leg, const JointVector& y_t,
                         const JointVector& y_0) {
  return inv_compose(fk(leg, y_0), fk(leg, y_t));
}

Pose corrected_odometry(const ResidualModel& model, const KinematicChain& leg,
                        const JointVector& y_t, const JointVector& y_0) {
  Pose analytic = analytical_odometry(leg, y_t, y_0);
  Pose out = model.predict(odometry_features(y_t, y_0, analytic));
  return model.residual ? compose(analytic, out) : out;
}

Pose residual_error(const Pose& ee_estimate, const Pose& odometry, const Pose& goal) {
  Pose current_goal = compose(goal, odometry);
  return inv_compose(ee_estimate, current_goal);
}

double evaluate_loss(const ResidualModel& model, const TrainingSet& set) {
  check_set(model, set, "evaluation");
  return batched_loss(model, standardize(model, set.features),
                      normalize_labels(model, set.labels));
}

void train_model(ResidualModel& model, TrainingSet train, const TrainingSet& val,
                 const TrainConfig& cfg, const EpochSampler& sampler) {
  check_set(model, train, "training");
  check_set(model, val, "validation");
  if (train.size() == 0) throw Error("empty training set");
  if (cfg.batch <= 0 || cfg.epochs < 0 || !(cfg.lr > 0.0)) {
    throw ConfigError("invalid training hyperparameters");
  }
  model.train_config = cfg;
  model.curves.clear();
  fit_normalization(model, train);

  Eigen::MatrixXd val_x = standardize(model, val.features);
  Eigen::MatrixXd val_y = normalize_labels(model, val.labels);
  Eigen::MatrixXd x = standardize(model, train.features);
  Eigen::MatrixXd y = normalize_labels(model, train.labels);
  model.curves.push_back({0, batched_loss(model, x, y), batched_loss(model, val_x, val_y)});

  Eigen::VectorXd& p = model.net.params();
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(p.size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(p.size());
  Eigen::VectorXd grad(p.size());
  Eigen::VectorXd last_good = p;
  std::int64_t step = 0;
  std::vector<int> order;
  Eigen::MatrixXd bx, by;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    if (sampler && sampler(epoch, train)) {
      check_set(model, train, "training");
      x = standardize(model, train.features);
      y = normalize_labels(model, train.labels);
    }
    const int n = static_cast<int>(x.cols());
    order.resize(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(cfg.seed * 1000003ull + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), rng);

    double sum = 0.0;
    for (int start = 0; start < n; start += cfg.batch) {
      const int len = std::min(cfg.batch, n - start);
      bx.resize(x.rows(), len);
      by.resize(9, len);
      for (int k = 0; k < len; ++k) {
        bx.col(k) = x.col(order[start + k]);
        by.col(k) = y.col(order[start + k]);
      }
      double l = model.net.loss(bx, by, &grad);
      if (!std::isfinite(l) || !grad.allFinite()) {
        p = last_good;
        throw NonFiniteLoss("non-finite loss in epoch " + std::to_string(epoch) +
                            "; restored the parameters of epoch " +
                            std::to_string(epoch - 1));
      }
      sum += l * len;
      ++step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * grad;
      m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * grad.cwiseAbs2();
      p.array() -= cfg.lr * ((m1.array() / c1) / ((m2.array() / c2).sqrt() + cfg.eps) +
                             cfg.weight_decay * p.array());
    }
    double val_loss = batched_loss(model, val_x, val_y);
    if (!std::isfinite(val_loss)) {
      p = last_good;
      throw NonFiniteLoss("non-finite validation loss in epoch " + std::to_string(epoch));
    }
    last_good = p;
    model.curves.push_back({epoch, sum / n, val_loss});
  }
}

std::string model_to_json(const ResidualModel& m) {
  using nlohmann::json;
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  json j;
  j["format"] = kFormat;
  j["role"] = role_name(m.role);
  j["residual"] = m.residual;
  const MlpShape& s = m.net.shape();
  j["architecture"] = {{"inputs", s.inputs},
                       {"width", s.width},
                       {"hidden_layers", s.hidden_layers},
                       {"activation", "silu"},
                       {"heads", {3, 6}}};
  j["architecture_hash"] = hex64(s.hash());
  j["input_mean"] = vec(m.in_mean);
  j["input_scale"] = vec(m.in_scale);
  j["output_offset"] = vec(m.out_offset);
  j["output_scale"] = vec(m.out_scale);
  const TrainConfig& c = m.train_config;
  j["train"] = {{"lr", c.lr},       {"weight_decay", c.weight_decay},
                {"batch", c.batch}, {"epochs", c.epochs},
                {"width", c.width}, {"seed", c.seed},
                {"beta1", c.beta1}, {"beta2", c.beta2},
                {"eps", c.eps}};
  j["dataset_hash"] = hex64(m.dataset_hash);
  json curves = json::array();
  for (const auto& e : m.curves) curves.push_back({e.epoch, e.train_loss, e.val_loss});
  j["curves"] = curves;
  j["parameters"] = vec(m.net.params());
  return j.dump() + "\n";
}

ResidualModel model_from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(1, e.byte, std::string("checkpoint: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) throw ConfigError("unknown checkpoint format");
    ResidualModel m;
    m.role = role_from_name(j.at("role").get<std::string>());
    m.residual = j.at("residual").get<bool>();
    const json& a = j.at("architecture");
    MlpShape s;
    s.inputs = a.at("inputs").get<int>();
    s.width = a.at("width").get<int>();
    s.hidden_layers = a.at("hidden_layers").get<int>();
    if (a.at("activation").get<std::string>() != "silu") throw HashMismatch("unsupported activation");
    if (j.at("architecture_hash").get<std::string>() != hex64(s.hash())) {
      throw HashMismatch("checkpoint architecture hash does not match " + s.describe());
    }
    if (s.inputs != role_inputs(m.role)) throw HashMismatch("checkpoint inputs do not match its role");
    m.net = Mlp(s);
    auto load = [](const json& v, Eigen::Index n, const char* what) {
      auto d = v.get<std::vector<double>>();
      if (static_cast<Eigen::Index>(d.size()) != n) {
        throw HashMismatch(std::string("checkpoint field '") + what + "' has the wrong size");
      }
      return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(d.data(), n));
    };
    m.in_mean = load(j.at("input_mean"), s.inputs, "input_mean");
    m.in_scale = load(j.at("input_scale"), s.inputs, "input_scale");
    m.out_offset = load(j.at("output_offset"), 9, "output_offset");
    m.out_scale = load(j.at("output_scale"), 9, "output_scale");
    m.net.params() = load(j.at("parameters"), m.net.params().size(), "parameters");
    const json& t = j.at("train");
    m.train_config.lr = t.at("lr").get<double>();
    m.train_config.weight_decay = t.at("weight_decay").get<double>();
    m.train_config.batch = t.at("batch").get<int>();
    m.train_config.epochs = t.at("epochs").get<int>();
    m.train_config.width = t.at("width").get<int>();
    m.train_config.seed = t.at("seed").get<std::uint64_t>();
    m.train_config.beta1 = t.at("beta1").get<double>();
    m.train_config.beta2 = t.at("beta2").get<double>();
    m.train_config.eps = t.at("eps").get<double>();
    m.dataset_hash = std::stoull(j.at("dataset_hash").get<std::string>(), nullptr, 16);
    for (const auto& e : j.at("curves")) {
      m.curves.push_back({e.at(0).get<int>(), e.at(1).get<double>(), e.at(2).get<double>()});
    }
    if (!m.net.params().allFinite()) throw ConfigError("checkpoint has non-finite parameters");
    return m;
  } catch (const json::exception& e) {
    throw ParseError(1, 0, std::string("checkpoint: ") + e.what());
  }
}

void save_model(const ResidualModel& model, const std::string& path) {
  write_text_atomic(path, model_to_json(model));
}

ResidualModel load_model(const std::string& path) {
  return model_from_json(read_text_file(path));
}

}  // namespace reach
