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

#include "reach/chain.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "reach/errors.h"
#include "reach/kvtext.h"

namespace reach {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string pose_text(const Pose& p) {
  auto a = p.to_array();
  std::string s = "[";
  for (int i = 0; i < 7; ++i) {
    if (i) s += ", ";
    s += num(a[i]);
  }
  return s + "]";
}

[[noreturn]] void fail_at(const KvLocation& at, const std::string& why) {
  throw ParseError(at.line, at.offset, why);
}

Pose parse_pose(const KvValue& v, const std::string& owner) {
  auto n = v.as_numbers(7);
  double qn = std::sqrt(n[3] * n[3] + n[4] * n[4] + n[5] * n[5] + n[6] * n[6]);
  if (std::abs(qn - 1.0) > 1e-6) {
    throw ValidationError(owner, "pose quaternion is not unit length");
  }
  return Pose::FromArray(n);
}

Joint parse_joint(const KvEntry& block) {
  Joint j;
  bool has_name = false, has_parent = false, has_axis = false,
       has_origin = false, has_limits = false;
  for (const auto& e : block.children) {
    if (e.is_block) fail_at(e.where, "unexpected block '" + e.key + "' in joint");
    const std::string owner = has_name ? j.name : std::string("?");
    if (e.key == "name") {
      j.name = e.value.as_string();
      has_name = true;
    } else if (e.key == "parent") {
      j.parent = e.value.as_string();
      has_parent = true;
    } else if (e.key == "child") {
      j.child = e.value.as_string();
    } else if (e.key == "type") {
      const auto& t = e.value.as_string();
      if (t == "revolute") {
        j.type = JointType::kRevolute;
      } else if (t == "prismatic") {
        j.type = JointType::kPrismatic;
      } else {
        fail_at(e.value.where, "unknown joint type '" + t + "'");
      }
    } else if (e.key == "axis") {
      auto a = e.value.as_numbers(3);
      j.axis = Vec3(a[0], a[1], a[2]);
      has_axis = true;
    } else if (e.key == "origin") {
      j.origin = parse_pose(e.value, owner);
      has_origin = true;
    } else if (e.key == "limits") {
      auto l = e.value.as_numbers(2);
      j.lower = l[0];
      j.upper = l[1];
      has_limits = true;
    } else {
      fail_at(e.where, "unknown joint field '" + e.key + "'");
    }
  }
  if (!has_name) fail_at(block.where, "joint without name");
  if (!has_parent) fail_at(block.where, "joint '" + j.name + "' without parent");
  if (!has_axis) fail_at(block.where, "joint '" + j.name + "' without axis");
  if (!has_origin) fail_at(block.where, "joint '" + j.name + "' without origin");
  if (!has_limits) fail_at(block.where, "joint '" + j.name + "' without limits");
  if (j.child.empty()) j.child = j.name;
  return j;
}

}  // namespace

KinematicChain::KinematicChain(std::string name, std::vector<Joint> joints,
                               Pose ee_offset)
    : name_(std::move(name)), joints_(std::move(joints)), ee_offset_(ee_offset) {
  std::set<std::string> names;
  std::set<std::string> links;
  if (!joints_.empty()) links.insert(joints_.front().parent);
  for (std::size_t i = 0; i < joints_.size(); ++i) {
    Joint& j = joints_[i];
    if (j.name.empty()) throw ValidationError("?", "empty joint name");
    if (j.child.empty()) j.child = j.name;
    if (!names.insert(j.name).second) {
      throw ValidationError(j.name, "duplicate joint name");
    }
    if (!std::isfinite(j.axis.norm()) || std::abs(j.axis.norm() - 1.0) > 1e-9) {
      throw ValidationError(j.name, "axis is not unit length");
    }
    if (!std::isfinite(j.lower) || !std::isfinite(j.upper)) {
      throw ValidationError(j.name, "non-finite limits");
    }
    if (j.lower > j.upper) throw ValidationError(j.name, "inverted limits");
    if (i > 0 && j.parent != joints_[i - 1].child) {
      throw ValidationError(j.name, "parent '" + j.parent +
                                        "' is not the previous joint's child '" +
                                        joints_[i - 1].child + "'");
    }
    if (!links.insert(j.child).second) {
      throw ValidationError(j.name, "child link '" + j.child + "' already in chain");
    }
  }
}

int KinematicChain::index_of(std::string_view joint_name) const {
  for (int i = 0; i < dof(); ++i) {
    if (joints_[i].name == joint_name) return i;
  }
  return -1;
}

JointVector KinematicChain::lower() const {
  JointVector v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = joints_[i].lower;
  return v;
}

JointVector KinematicChain::upper() const {
  JointVector v(dof());
  for (int i = 0; i < dof(); ++i) v[i] = joints_[i].upper;
  return v;
}

JointVector KinematicChain::clamp(const JointVector& q) const {
  JointVector out = q;
  for (int i = 0; i < dof(); ++i) {
    out[i] = std::min(std::max(q[i], joints_[i].lower), joints_[i].upper);
  }
  return out;
}

bool KinematicChain::within_limits(const JointVector& q, double tol) const {
  if (q.size() != dof()) return false;
  for (int i = 0; i < dof(); ++i) {
    if (q[i] < joints_[i].lower - tol || q[i] > joints_[i].upper + tol) return false;
  }
  return true;
}

std::string KinematicChain::to_text() const {
  std::ostringstream os;
  os << "name = \"" << name_ << "\"\n";
  for (const auto& j : joints_) {
    os << "joint {\n"
       << "  name = " << j.name << "\n"
       << "  parent = " << j.parent << "\n"
       << "  child = " << j.child << "\n"
       << "  type = " << (j.type == JointType::kRevolute ? "revolute" : "prismatic")
       << "\n"
       << "  axis = [" << num(j.axis.x()) << ", " << num(j.axis.y()) << ", "
       << num(j.axis.z()) << "]\n"
       << "  origin = " << pose_text(j.origin) << "\n"
       << "  limits = [" << num(j.lower) << ", " << num(j.upper) << "]\n"
       << "}\n";
  }
  os << "ee_offset = " << pose_text(ee_offset_) << "\n";
  return os.str();
}

std::uint64_t KinematicChain::hash() const { return fnv1a(to_text()); }

KinematicChain KinematicChain::with_locked(const std::vector<std::string>& names,
                                           double at) const {
  auto joints = joints_;
  for (const auto& n : names) {
    int i = index_of(n);
    if (i < 0) throw ValidationError(n, "no such joint to lock");
    joints[i].lower = joints[i].upper = at;
  }
  return KinematicChain(name_ + "_locked", std::move(joints), ee_offset_);
}

KinematicChain KinematicChain::with_root_joint(const Joint& root) const {
  std::vector<Joint> joints;
  joints.push_back(root);
  if (joints.back().child.empty()) joints.back().child = root.name;
  for (auto j : joints_) joints.push_back(j);
  if (joints.size() > 1) joints[1].parent = joints[0].child;
  return KinematicChain(name_ + "+" + root.name, std::move(joints), ee_offset_);
}

KinematicChain KinematicChain::with_link_scales(const Eigen::VectorXd& scales) const {
  if (scales.size() != dof() + 1) {
    throw Error("link scale vector needs dof+1 entries");
  }
  auto joints = joints_;
  for (int i = 0; i < dof(); ++i) {
    joints[i].origin = Pose(joints[i].origin.translation() * scales[i],
                            joints[i].origin.rotation());
  }
  Pose ee(ee_offset_.translation() * scales[dof()], ee_offset_.rotation());
  return KinematicChain(name_, std::move(joints), ee);
}

KinematicChain parse_chain(std::string_view text) {
  KvDocument doc = parse_kv(text);
  std::string name = "chain";
  std::vector<Joint> joints;
  Pose ee;
  bool has_ee = false;
  for (const auto& e : doc.entries) {
    if (e.key == "name" && !e.is_block) {
      name = e.value.as_string();
    } else if (e.key == "joint" && e.is_block) {
      joints.push_back(parse_joint(e));
    } else if (e.key == "ee_offset" && !e.is_block) {
      if (has_ee) fail_at(e.where, "duplicate ee_offset");
      ee = parse_pose(e.value, "ee_offset");
      has_ee = true;
    } else {
      fail_at(e.where, "unexpected entry '" + e.key + "'");
    }
  }
  if (!has_ee) throw ParseError(1, 0, "missing ee_offset");
  return KinematicChain(name, std::move(joints), ee);
}

KinematicChain load_chain(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UpstreamMissing("cannot open chain file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_chain(ss.str());
}

namespace {

// Running transform as a rotation matrix and an offset.
struct Frame {
  Mat3 r = Mat3::Identity();
  Vec3 p = Vec3::Zero();

  void apply(const Pose& t) {
    p += r * t.translation();
    r = r * t.rotation_matrix();
  }
};

void apply_joint(Frame& f, const Joint& j, double q) {
  if (j.type == JointType::kRevolute) {
    f.r = f.r * axis_angle(j.axis, q);
  } else {
    f.p += f.r * (j.axis * q);
  }
}

}  // namespace

ChainFrames chain_frames(const KinematicChain& chain, const JointVector& q) {
  if (q.size() != chain.dof()) throw Error("joint vector length mismatch");
  ChainFrames out;
  out.origin.reserve(chain.dof());
  out.axis.reserve(chain.dof());
  Frame f;
  for (int i = 0; i < chain.dof(); ++i) {
    const Joint& j = chain.joint(i);
    f.apply(j.origin);
    out.origin.push_back(f.p);
    out.axis.push_back(f.r * j.axis);
    apply_joint(f, j, q[i]);
  }
  f.apply(chain.ee_offset());
  out.ee = Pose(f.p, f.r);
  return out;
}

Pose fk(const KinematicChain& chain, const JointVector& q) {
  if (q.size() != chain.dof()) throw Error("joint vector length mismatch");
  Frame f;
  for (int i = 0; i < chain.dof(); ++i) {
    f.apply(chain.joint(i).origin);
    apply_joint(f, chain.joint(i), q[i]);
  }
  f.apply(chain.ee_offset());
  return Pose(f.p, f.r);
}

Jacobian jacobian(const KinematicChain& chain, const JointVector& q) {
  ChainFrames fr = chain_frames(chain, q);
  Jacobian jac(6, chain.dof());
  const Vec3& pe = fr.ee.translation();
  for (int i = 0; i < chain.dof(); ++i) {
    if (chain.joint(i).type == JointType::kRevolute) {
      jac.block<3, 1>(0, i) = fr.axis[i].cross(pe - fr.origin[i]);
      jac.block<3, 1>(3, i) = fr.axis[i];
    } else {
      jac.block<3, 1>(0, i) = fr.axis[i];
      jac.block<3, 1>(3, i).setZero();
    }
  }
  return jac;
}

Eigen::VectorXd gravity_load(const KinematicChain& chain, const JointVector& q) {
  ChainFrames fr = chain_frames(chain, q);
  const Vec3 g(0.0, 0.0, -1.0);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(chain.dof());
  for (int i = 0; i < chain.dof(); ++i) {
    if (chain.joint(i).type != JointType::kRevolute) continue;
    double tau = 0.0;
    for (int j = i + 1; j < chain.dof(); ++j) {
      tau += fr.axis[i].dot((fr.origin[j] - fr.origin[i]).cross(g));
    }
    tau += fr.axis[i].dot((fr.ee.translation() - fr.origin[i]).cross(g));
    load[i] = tau;
  }
  return load;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hex64(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace reach
