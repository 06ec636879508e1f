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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <string>
#include <vector>

#include "reach/chain.h"
#include "reach/control.h"
#include "reach/errors.h"
#include "reach/experiment.h"
#include "reach/io.h"
#include "reach/kabsch.h"
#include "reach/retarget.h"
#include "reach/scoring.h"
#include "reach/se3.h"

namespace py = pybind11;
using namespace reach;

namespace {

Pose pose_from(const std::array<double, 7>& a) { return Pose::FromArray(a); }

py::dict metrics_dict(const Metrics& m) {
  py::dict d;
  d["n"] = m.n;
  d["trans_mean_cm"] = m.trans_mean_cm;
  d["trans_std_cm"] = m.trans_std_cm;
  d["rot_mean_deg"] = m.rot_mean_deg;
  d["rot_std_deg"] = m.rot_std_deg;
  d["joint_err_rad"] = m.joint_err_rad;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Pose algebra, kinematics and evaluation helpers of the reach library.";

  auto base = py::register_exception<Error>(m, "ReachError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<HashMismatch>(m, "HashMismatch", base.ptr());
  py::register_exception<DegenerateInput>(m, "DegenerateInput", base.ptr());
  py::register_exception<NoFeasibleGrasp>(m, "NoFeasibleGrasp", base.ptr());
  py::register_exception<AlreadyRetargeted>(m, "AlreadyRetargeted", base.ptr());

  py::class_<Pose>(m, "Pose")
      .def(py::init<>())
      .def(py::init(&pose_from), py::arg("values"))
      .def_static("from_matrix", [](const Mat4& t) { return Pose::FromMatrix(t); })
      .def("to_array", &Pose::to_array)
      .def("matrix", &Pose::matrix)
      .def_property_readonly("translation", [](const Pose& p) { return Vec3(p.translation()); })
      .def_property_readonly("rotation_matrix", &Pose::rotation_matrix)
      .def("__repr__", [](const Pose& p) {
        auto a = p.to_array();
        return py::str("Pose([{}, {}, {}, {}, {}, {}, {}])")
            .format(a[0], a[1], a[2], a[3], a[4], a[5], a[6]);
      });

  m.def("compose", &compose, py::arg("a"), py::arg("b"),
        "Pose whose matrix is matrix(b) @ matrix(a).");
  m.def("inv_compose", &inv_compose, py::arg("a"), py::arg("b"),
        "Pose whose matrix is inv(matrix(b)) @ matrix(a).");

  py::class_<KinematicChain>(m, "KinematicChain")
      .def_property_readonly("dof", &KinematicChain::dof)
      .def_property_readonly("joint_names", [](const KinematicChain& c) {
        std::vector<std::string> names;
        for (const auto& j : c.joints()) names.push_back(j.name);
        return names;
      })
      .def("to_text", &KinematicChain::to_text);
  m.def("parse_chain", [](const std::string& text) { return parse_chain(text); }, py::arg("text"));
  m.def("load_chain", &load_chain, py::arg("path"));
  m.def("fk", [](const KinematicChain& c, const Eigen::VectorXd& q) { return fk(c, q); }, py::arg("chain"),
        py::arg("q"));

  m.def(
      "kabsch_umeyama",
      [](const Eigen::Matrix<double, Eigen::Dynamic, 3>& src, const Eigen::Matrix<double, Eigen::Dynamic, 3>& dst,
         bool with_scale) {
        if (src.rows() != dst.rows()) throw DegenerateInput("src and dst need the same number of rows");
        Correspondences c;
        for (Eigen::Index i = 0; i < src.rows(); ++i) {
          c.src.push_back(src.row(i).transpose());
          c.dst.push_back(dst.row(i).transpose());
        }
        Alignment a = kabsch_umeyama(c, with_scale);
        return py::make_tuple(a.pose, a.scale, a.rmse);
      },
      py::arg("src"), py::arg("dst"), py::arg("with_scale") = false,
      "Returns (pose, scale, rmse) with dst ~= scale * R @ src + t.");

  m.def(
      "retarget_to_hand",
      [](const Pose& grasp, bool base_frame) {
        GraspCandidate g;
        g.pose = grasp;
        g.confidence = 1.0;
        g.width = 0.05;
        RetargetOptions opt;
        if (base_frame) opt.frame = OffsetFrame::kBase;
        RetargetResult r = retarget_to_hand_detailed(g, opt);
        return py::make_tuple(r.pose, r.clipped);
      },
      py::arg("grasp"), py::arg("base_frame") = false, "Returns (hand_pose, yaw_clipped).");

  m.def(
      "adjust_goal",
      [](const Pose& err, double alpha, double start, double stop) {
        GoalAdjustConfig cfg{alpha, start, stop};
        cfg.validate();
        return adjust_goal(err, cfg);
      },
      py::arg("err"), py::arg("alpha") = 1.6, py::arg("start_thresh") = 0.15, py::arg("stop_thresh") = 0.02);

  m.def(
      "config_hash",
      [](const std::string& text, const std::string& base_dir) {
        ExperimentConfig c = parse_experiment(text, base_dir);
        return hex64(c.hash());
      },
      py::arg("text"), py::arg("base_dir") = ".");

  m.def(
      "rollout_metrics",
      [](const std::vector<std::string>& paths) {
        std::vector<RolloutLog> logs;
        for (const auto& p : paths) logs.push_back(rollout_from_jsonl(read_text_file(p)));
        return metrics_dict(compute_metrics(logs));
      },
      py::arg("paths"), "Final-error summary over rollout log files.");
}
