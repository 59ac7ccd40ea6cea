// Copyright 2026 The OptiWB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "optiwb/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace optiwb {
namespace {

enum class Task { kFull, kWristPosition, kOrientation };

struct Frame {
  Mat3 r;
  Vec3 p;
};

// Root-frame forward pass; frames[k] is the frame after joint k (1-based),
// frames[0] the arm root.
void root_frames(const RobotModel& model, const VecX& arm, std::vector<Frame>& frames) {
  const int n = model.arm_dof();
  frames.resize(n + 1);
  frames[0] = {Mat3::Identity(), Vec3::Zero()};
  for (int k = 0; k < n; ++k) {
    const ArmJoint& j = model.arm_joints[k];
    const Mat3 origin_r = j.origin.rotation_matrix();
    const Frame& parent = frames[k];
    const Mat3 r_origin = parent.r * origin_r;
    frames[k + 1].p = parent.p + parent.r * j.origin.translation;
    frames[k + 1].r = r_origin * axis_rotation<double>(j.axis, arm[k]);
  }
}

Vec3 rotation_error(const Mat3& desired, const Mat3& current) {
  const Eigen::AngleAxisd aa(Mat3(desired * current.transpose()));
  return aa.angle() * aa.axis();
}

bool lines_intersect(const Vec3& p1, const Vec3& d1, const Vec3& p2, const Vec3& d2, Vec3& point) {
  const Vec3 n = d1.cross(d2);
  if (n.squaredNorm() < 1e-18) return false;
  const Vec3 r = p2 - p1;
  if (std::abs(r.dot(n.normalized())) > 1e-9) return false;
  const double s = r.cross(d2).dot(n) / n.squaredNorm();
  point = p1 + s * d1;
  return true;
}

double wrap_into(double q, double lo, double hi) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  if (q >= lo && q <= hi) return q;
  double best = q;
  double best_gap = std::numeric_limits<double>::infinity();
  for (int k = -3; k <= 3; ++k) {
    const double c = q + k * kTwoPi;
    const double gap = c < lo ? lo - c : (c > hi ? c - hi : 0.0);
    if (gap < best_gap) {
      best_gap = gap;
      best = c;
    }
  }
  return best;
}

bool on_line(const Vec3& point, const Vec3& p, const Vec3& d) {
  return (point - p).cross(d.normalized()).norm() < 1e-9;
}

bool lexicographic_less(const VecX& a, const VecX& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

constexpr double kBranchTolerance = 1e-3;

// Angle about unit axis w taking p onto q (projections onto the normal plane).
double rotation_angle_between(const Vec3& w, const Vec3& p, const Vec3& q) {
  const Vec3 pp = p - w * w.dot(p);
  const Vec3 qq = q - w * w.dot(q);
  return std::atan2(w.dot(pp.cross(qq)), pp.dot(qq));
}

// All (a, b) with Rot(w1, a) Rot(w2, b) p = q for unit axes through the origin.
std::vector<std::pair<double, double>> two_axis_rotations(const Vec3& w1, const Vec3& w2, const Vec3& p,
                                                          const Vec3& q) {
  std::vector<std::pair<double, double>> out;
  const double c = w1.dot(w2);
  const double denom = c * c - 1.0;
  const Vec3 cross = w1.cross(w2);
  if (std::abs(denom) < 1e-12) return out;
  const double alpha = (c * w2.dot(p) - w1.dot(q)) / denom;
  const double beta = (c * w1.dot(q) - w2.dot(p)) / denom;
  double g2 = (p.squaredNorm() - alpha * alpha - beta * beta - 2.0 * alpha * beta * c) / cross.squaredNorm();
  if (g2 < -1e-9 * std::max(1.0, p.squaredNorm())) return out;
  g2 = std::max(g2, 0.0);
  const double gamma = std::sqrt(g2);
  for (const double g : {gamma, -gamma}) {
    const Vec3 z = alpha * w1 + beta * w2 + g * cross;
    out.emplace_back(rotation_angle_between(w1, z, q), rotation_angle_between(w2, p, z));
    if (gamma == 0.0) break;
  }
  return out;
}

}  // namespace

Transform3d base_transform(const BasePose& base) { return planar_transform(base.x, base.y, base.h); }

ChainPoses chain_poses(const RobotModel& model, const JointConfig& q) {
  ChainPoses out;
  const int n = model.arm_dof();
  out.frames.resize(n + 1);
  out.frames[0] = base_transform(q.base);
  Transform3d current = out.frames[0] * model.arm_mount_transform;
  for (int k = 0; k < n; ++k) {
    const ArmJoint& j = model.arm_joints[k];
    current = current * j.origin * Transform3d::FromRotation(Quat(Eigen::AngleAxisd(q.arm[k], j.axis)));
    out.frames[k + 1] = current;
  }
  out.end_effector = current * model.tool_transform;
  return out;
}

Transform3d forward_kinematics(const RobotModel& model, const JointConfig& q) {
  return chain_poses(model, q).end_effector;
}

Transform3d camera_pose(const RobotModel& model, const BasePose& base) {
  return base_transform(base) * model.camera_transform;
}

std::optional<ImagePoint> project_target(const RobotModel& model, const BasePose& base, const Vec3& target) {
  const Vec3 local = camera_pose(model, base).inverse() * target;
  if (!(local.x() > 0.0)) return std::nullopt;
  ImagePoint point;
  point.u = model.camera_ccd.focal * local.y() / local.x();
  point.v = model.camera_ccd.focal * local.z() / local.x();
  point.in_bounds =
      std::abs(point.u) <= 0.5 * model.camera_ccd.width && std::abs(point.v) <= 0.5 * model.camera_ccd.height;
  return point;
}

std::pair<double, double> pose_residual(const RobotModel& model, const JointConfig& q, const Transform3d& pose) {
  const Transform3d fk = forward_kinematics(model, q);
  return {(fk.translation - pose.translation).norm(), rotation_distance(fk.rotation, pose.rotation)};
}

IkSolver::IkSolver(const RobotModel& model, IkConfig config, std::vector<int> fixed_indices)
    : model_(&model), config_(config), fixed_(std::move(fixed_indices)) {
  const int n = model.arm_dof();
  std::sort(fixed_.begin(), fixed_.end());
  for (int k = 0; k < n; ++k)
    if (!std::binary_search(fixed_.begin(), fixed_.end(), k)) free_.push_back(k);
  if (free_.size() != 6)
    throw std::invalid_argument("augmented IK needs exactly 6 free arm joints, got " + std::to_string(free_.size()));

  std::vector<Frame> frames;
  root_frames(model, VecX::Zero(n), frames);
  first_origin_ = model.arm_joints[0].origin.translation;
  reach_ = 0.0;
  for (int k = 1; k < n; ++k) reach_ += model.arm_joints[k].origin.translation.norm();

  // Axis lines at the zero configuration, in the root frame.
  std::vector<Vec3> axis_point(n), axis_dir(n);
  for (int k = 0; k < n; ++k) {
    axis_point[k] = frames[k + 1].p;
    axis_dir[k] = frames[k + 1].r * model.arm_joints[k].axis;
  }

  Vec3 shoulder, w01;
  const bool has_shoulder = lines_intersect(axis_point[0], axis_dir[0], axis_point[1], axis_dir[1], shoulder);
  const bool has_wrist =
      n >= 7 && lines_intersect(axis_point[n - 3], axis_dir[n - 3], axis_point[n - 2], axis_dir[n - 2], w01) &&
      on_line(w01, axis_point[n - 1], axis_dir[n - 1]);
  for (int k : free_) (k <= n - 4 ? position_joints_ : wrist_joints_).push_back(k);
  const int middle_count = n - 6;
  if (has_shoulder && has_wrist && position_joints_.size() == 3 && wrist_joints_.size() == 3 && middle_count <= 3) {
    decoupled_ = true;
    shoulder_ = shoulder;
    const Frame& flange = frames[n];
    wrist_offset_ = flange.r.transpose() * (w01 - flange.p);
    // Shoulder-wrist distance depends on the middle joints only; bound it by
    // sampling them over their boxes (fixed joints included, conservatively).
    const int levels = middle_count <= 2 ? 41 : 15;
    std::vector<int> middle;
    for (int k = 2; k <= n - 4; ++k) middle.push_back(k);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    const Vec3 w_local = frames[n - 3].r.transpose() * (w01 - frames[n - 3].p);
    wrist_local_ = w_local;
    std::vector<int> counter(middle.size(), 0);
    VecX arm = VecX::Zero(n);
    while (true) {
      for (std::size_t m = 0; m < middle.size(); ++m) {
        const ArmJoint& j = model.arm_joints[middle[m]];
        arm[middle[m]] = j.pos_min + (j.pos_max - j.pos_min) * counter[m] / (levels - 1);
      }
      root_frames(model, arm, frames);
      const double d = (frames[n - 3].p + frames[n - 3].r * w_local - shoulder_).norm();
      lo = std::min(lo, d);
      hi = std::max(hi, d);
      std::size_t m = 0;
      while (m < middle.size() && ++counter[m] == levels) counter[m++] = 0;
      if (m == middle.size()) break;
    }
    const double margin = 0.01 + 0.01 * hi;
    wrist_min_ = std::max(0.0, lo - margin);
    wrist_max_ = hi + margin;
  }

  // Closed-form branch enumeration when only one free joint sits between
  // shoulder and wrist.
  if (decoupled_) {
    int middle_free = 0;
    for (int k = 2; k <= n - 4; ++k)
      if (!std::binary_search(fixed_.begin(), fixed_.end(), k)) ++middle_free;
    analytic_ = middle_free == 1 && position_joints_[0] == 0 && position_joints_[1] == 1;
    if (analytic_) {
      root_frames(model, VecX::Zero(n), frames);
      home_axes_.resize(n);
      for (int k = 0; k < n; ++k) home_axes_[k] = frames[k + 1].r * model.arm_joints[k].axis;
      home_flange_ = frames[n].r;
    }
  }

  // Reject chains whose free joints never span the six task directions.
  const VecX mid = [&] {
    VecX m(n);
    for (int k = 0; k < n; ++k) m[k] = 0.5 * (model.arm_joints[k].pos_min + model.arm_joints[k].pos_max);
    return m;
  }();
  double best_ratio = 0.0;
  for (int s = 0; s < 8; ++s) {
    VecX arm = mid;
    for (std::size_t f = 0; f < free_.size(); ++f) {
      const ArmJoint& j = model.arm_joints[free_[f]];
      const double frac = 0.2 + 0.6 * std::fmod(0.618034 * (s + 1) * (f + 1), 1.0);
      arm[free_[f]] = j.pos_min + frac * (j.pos_max - j.pos_min);
    }
    root_frames(model, arm, frames);
    Eigen::Matrix<double, 6, 6> jac;
    for (std::size_t f = 0; f < free_.size(); ++f) {
      const int k = free_[f];
      const Vec3 z = frames[k + 1].r * model.arm_joints[k].axis;
      jac.col(static_cast<Eigen::Index>(f)) << z.cross(frames[n].p - frames[k + 1].p), z;
    }
    const Eigen::JacobiSVD<Eigen::Matrix<double, 6, 6>> svd(jac);
    const auto& sv = svd.singularValues();
    if (sv[0] > 0.0) best_ratio = std::max(best_ratio, sv[5] / sv[0]);
  }
  if (best_ratio < 1e-9)
    throw KinematicsError("arm chain is kinematically degenerate: free joints cannot span the task, IK branches are indistinct");
}

Transform3d IkSolver::flange_target(const Transform3d& pose, const BasePose& nu) const {
  const Transform3d root = base_transform(nu) * model_->arm_mount_transform;
  return root.inverse() * pose * model_->tool_transform.inverse();
}

bool IkSolver::maybe_reachable(const Transform3d& pose, const BasePose& nu) const {
  const Transform3d flange = flange_target(pose, nu);
  if ((flange.translation - first_origin_).norm() > reach_ + 1e-9) return false;
  if (!decoupled_) return true;
  const Vec3 wrist = flange * wrist_offset_;
  const double d = (wrist - shoulder_).norm();
  return d >= wrist_min_ && d <= wrist_max_;
}

bool IkSolver::descend(const Transform3d& flange, VecX& arm, const std::vector<int>& moving, int iterations,
                       double tolerance, int task_kind) const {
  const RobotModel& model = *model_;
  const int n = model.arm_dof();
  const Task task = static_cast<Task>(task_kind);
  const Mat3 desired_r = flange.rotation_matrix();
  const Vec3 desired_wrist = flange * wrist_offset_;
  std::vector<Frame> frames;
  const Vec3& w_local = wrist_local_;
  const int cols = static_cast<int>(moving.size());
  Eigen::Matrix<double, 6, Eigen::Dynamic> jac(6, cols);
  Eigen::Matrix<double, 6, 1> err;
  double checkpoint = std::numeric_limits<double>::infinity();

  for (int it = 0; it <= iterations; ++it) {
    root_frames(model, arm, frames);
    int rows = 6;
    Vec3 point = frames[n].p;
    switch (task) {
      case Task::kFull:
        err << flange.translation - frames[n].p, rotation_error(desired_r, frames[n].r);
        break;
      case Task::kWristPosition:
        point = frames[n - 3].p + frames[n - 3].r * w_local;
        err.head<3>() = desired_wrist - point;
        rows = 3;
        break;
      case Task::kOrientation:
        err.head<3>() = rotation_error(desired_r, frames[n].r);
        rows = 3;
        break;
    }
    const double e = task == Task::kFull ? std::max(err.head<3>().norm(), err.tail<3>().norm())
                                         : err.head<3>().norm();
    if (e < tolerance) return true;
    if (it == iterations) break;
    if (it > 0 && it % 8 == 0) {
      if (e > 0.5 * checkpoint) return false;
      checkpoint = e;
    } else if (it == 0) {
      checkpoint = e;
    }
    for (int c = 0; c < cols; ++c) {
      const int k = moving[c];
      const Vec3 z = frames[k + 1].r * model.arm_joints[k].axis;
      switch (task) {
        case Task::kFull:
          jac.col(c) << z.cross(point - frames[k + 1].p), z;
          break;
        case Task::kWristPosition:
          jac.col(c).head<3>() = z.cross(point - frames[k + 1].p);
          break;
        case Task::kOrientation:
          jac.col(c).head<3>() = z;
          break;
      }
    }
    const auto j = jac.topRows(rows);
    const double damping = e > 1e-3 ? 1e-4 : 1e-12;
    const Eigen::MatrixXd jjt = j * j.transpose() + damping * Eigen::MatrixXd::Identity(rows, rows);
    VecX step = j.transpose() * jjt.ldlt().solve(err.head(rows));
    const double norm = step.cwiseAbs().maxCoeff();
    if (norm > 0.5) step *= 0.5 / norm;
    for (int c = 0; c < cols; ++c) arm[moving[c]] += step[c];
  }
  return false;
}

std::vector<VecX> IkSolver::seeds_for(const std::vector<int>& joints, const VecX& base) const {
  const int levels = config_.seeds_per_joint;
  std::vector<VecX> seeds;
  std::vector<int> counter(joints.size(), 0);
  while (true) {
    VecX s = base;
    for (std::size_t m = 0; m < joints.size(); ++m) {
      const ArmJoint& j = model_->arm_joints[joints[m]];
      s[joints[m]] = j.pos_min + (j.pos_max - j.pos_min) * (counter[m] + 0.5) / levels;
    }
    seeds.push_back(std::move(s));
    std::size_t m = 0;
    while (m < joints.size() && ++counter[m] == levels) counter[m++] = 0;
    if (m == joints.size()) break;
  }
  return seeds;
}

void IkSolver::finish(const Transform3d& pose, const BasePose& nu, std::vector<VecX>& candidates,
                      IkSolutionSet& out) const {
  std::vector<VecX> kept;
  for (VecX& arm : candidates) {
    bool within = true;
    for (int k = 0; k < model_->arm_dof(); ++k) {
      const ArmJoint& j = model_->arm_joints[k];
      arm[k] = wrap_into(arm[k], j.pos_min, j.pos_max);
      if (arm[k] < j.pos_min || arm[k] > j.pos_max) within = false;
    }
    bool duplicate = false;
    for (const VecX& other : kept)
      if ((other - arm).cwiseAbs().maxCoeff() < kBranchTolerance) duplicate = true;
    if (duplicate) continue;
    if (!within) {
      ++out.rejected_by_limits;
      continue;
    }
    const JointConfig q(nu, arm);
    const auto [pos_err, rot_err] = pose_residual(*model_, q, pose);
    if (pos_err >= config_.accept_tol || rot_err >= config_.accept_tol) continue;
    kept.push_back(arm);
  }
  std::sort(kept.begin(), kept.end(), lexicographic_less);
  if (static_cast<int>(kept.size()) > config_.max_branches) kept.resize(config_.max_branches);
  for (std::size_t b = 0; b < kept.size(); ++b) {
    IkSolution s;
    s.config = JointConfig(nu, kept[b]);
    s.branch_id = static_cast<int>(b);
    std::tie(s.position_residual, s.orientation_residual) = pose_residual(*model_, s.config, pose);
    out.solutions.push_back(std::move(s));
  }
}

IkSolutionSet IkSolver::solve(const Transform3d& pose, const std::vector<FixedJoint>& fixed,
                              const BasePose& nu) const {
  IkSolutionSet out;
  if (!maybe_reachable(pose, nu)) {
    out.prefiltered = true;
    return out;
  }
  const int n = model_->arm_dof();
  VecX base(n);
  for (int k = 0; k < n; ++k) base[k] = 0.5 * (model_->arm_joints[k].pos_min + model_->arm_joints[k].pos_max);
  for (const FixedJoint& f : fixed) base[f.arm_joint_index] = f.value;
  const Transform3d flange = flange_target(pose, nu);

  const auto is_new = [](const std::vector<VecX>& found, const VecX& arm) {
    for (const VecX& other : found)
      if ((other - arm).cwiseAbs().maxCoeff() < kBranchTolerance) return false;
    return true;
  };

  std::vector<VecX> candidates;
  if (analytic_) {
    for (VecX seed : closed_form(flange, base)) {
      if (descend(flange, seed, free_, 8, config_.residual_tol, static_cast<int>(Task::kFull)) &&
          is_new(candidates, seed))
        candidates.push_back(seed);
    }
  } else if (decoupled_) {
    std::vector<VecX> arm_positions;
    for (VecX seed : seeds_for(position_joints_, base)) {
      if (descend(flange, seed, position_joints_, config_.max_iterations, 1e-6, static_cast<int>(Task::kWristPosition)) && is_new(arm_positions, seed))
        arm_positions.push_back(seed);
    }
    for (const VecX& partial : arm_positions) {
      for (VecX seed : seeds_for(wrist_joints_, partial)) {
        if (!descend(flange, seed, wrist_joints_, config_.max_iterations, 1e-6, static_cast<int>(Task::kOrientation))) continue;
        if (!descend(flange, seed, free_, config_.max_iterations, config_.residual_tol, static_cast<int>(Task::kFull))) continue;
        if (is_new(candidates, seed)) candidates.push_back(seed);
      }
    }
  } else {
    for (VecX seed : seeds_for(free_, base)) {
      if (descend(flange, seed, free_, config_.max_iterations, config_.residual_tol, static_cast<int>(Task::kFull)) && is_new(candidates, seed))
        candidates.push_back(seed);
    }
  }
  finish(pose, nu, candidates, out);
  return out;
}

std::vector<VecX> IkSolver::closed_form(const Transform3d& flange, const VecX& base) const {
  const RobotModel& model = *model_;
  const int n = model.arm_dof();
  const int elbow = position_joints_[2];
  std::vector<Frame> frames;
  std::vector<VecX> out;

  const Vec3 target = flange * wrist_offset_ - shoulder_;
  VecX arm = base;
  arm[0] = arm[1] = 0.0;
  for (int k : wrist_joints_) arm[k] = 0.0;
  const auto wrist_at = [&](double q) {
    arm[elbow] = q;
    root_frames(model, arm, frames);
    return Vec3(frames[n - 3].p + frames[n - 3].r * wrist_local_ - shoulder_);
  };
  // |W - S|^2 is A + B cos q + C sin q in the elbow angle.
  const double g0 = wrist_at(0.0).squaredNorm();
  const double g1 = wrist_at(0.5 * std::numbers::pi).squaredNorm();
  const double g2 = wrist_at(std::numbers::pi).squaredNorm();
  const double a = 0.5 * (g0 + g2);
  const double b = 0.5 * (g0 - g2);
  const double c = g1 - a;
  const double r = std::hypot(b, c);
  if (r < 1e-12) return out;
  const double ratio = (target.squaredNorm() - a) / r;
  if (std::abs(ratio) > 1.0 + 1e-12) return out;
  const double phase = std::atan2(c, b);
  const double spread = std::acos(std::clamp(ratio, -1.0, 1.0));
  std::vector<double> elbows = {phase + spread};
  if (spread > 1e-12) elbows.push_back(phase - spread);

  const Mat3 desired = flange.rotation_matrix();
  const Vec3& w5 = home_axes_[n - 3];
  const Vec3& w6 = home_axes_[n - 2];
  const Vec3& w7 = home_axes_[n - 1];
  const Vec3 perp = w7.unitOrthogonal();
  for (const double qe : elbows) {
    const Vec3 w0 = wrist_at(qe);
    for (const auto& [q1, q2] : two_axis_rotations(home_axes_[0], home_axes_[1], w0, target)) {
      VecX sol = arm;
      sol[elbow] = qe;
      sol[0] = q1;
      sol[1] = q2;
      for (int k : wrist_joints_) sol[k] = 0.0;
      root_frames(model, sol, frames);
      const Mat3 wrist_rot = home_flange_ * frames[n].r.transpose() * desired * home_flange_.transpose();
      for (const auto& [q5, q6] : two_axis_rotations(w5, w6, w7, wrist_rot * w7)) {
        const Mat3 e56 = (Eigen::AngleAxisd(q5, w5) * Eigen::AngleAxisd(q6, w6)).toRotationMatrix();
        sol[n - 3] = q5;
        sol[n - 2] = q6;
        sol[n - 1] = rotation_angle_between(w7, perp, e56.transpose() * wrist_rot * perp);
        out.push_back(sol);
      }
    }
  }
  return out;
}

std::optional<JointConfig> IkSolver::refine(const Transform3d& pose, const std::vector<FixedJoint>& fixed,
                                            const BasePose& nu, const VecX& seed_arm, double tolerance) const {
  VecX arm = seed_arm;
  for (const FixedJoint& f : fixed) arm[f.arm_joint_index] = f.value;
  const Transform3d flange = flange_target(pose, nu);
  const double tol = tolerance > 0.0 ? tolerance : config_.residual_tol;
  if (!descend(flange, arm, free_, config_.max_iterations, tol, static_cast<int>(Task::kFull))) return std::nullopt;
  for (int k = 0; k < model_->arm_dof(); ++k) {
    const ArmJoint& j = model_->arm_joints[k];
    arm[k] = wrap_into(arm[k], j.pos_min, j.pos_max);
    if (arm[k] < j.pos_min || arm[k] > j.pos_max) return std::nullopt;
  }
  JointConfig q(nu, arm);
  const auto [pos_err, rot_err] = pose_residual(*model_, q, pose);
  if (pos_err >= config_.accept_tol || rot_err >= config_.accept_tol) return std::nullopt;
  return q;
}

IkSolutionSet augmented_ik(const RobotModel& model, const Transform3d& pose, const std::vector<FixedJoint>& fixed,
                           const BasePose& nu, const IkConfig& config) {
  std::vector<int> indices;
  for (const FixedJoint& f : fixed) indices.push_back(f.arm_joint_index);
  const IkSolver solver(model, config, indices);
  return solver.solve(pose, fixed, nu);
}

}  // namespace optiwb
