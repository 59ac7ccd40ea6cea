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

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "optiwb/base_profile.hpp"
#include "optiwb/geometry.hpp"
#include "optiwb/rigid_transform.hpp"
#include "optiwb/spline.hpp"

namespace optiwb {

/// Revolute arm joint: the child frame is parent * origin * Rot(axis, q).
struct ArmJoint {
  std::string name;
  Vec3 axis = Vec3::UnitZ();
  Transform3d origin;
  double pos_min = -std::numbers::pi;
  double pos_max = std::numbers::pi;
  double vel_max = 1.0;
  double acc_max = 1.0;
};

/// Convex volume rigidly attached to a frame: 0 is the base, k >= 1 is the
/// frame after arm joint k.
struct LinkVolume {
  std::string name;
  int frame = 0;
  ConvexVolume volume;
};

/// Image sensor; the optical axis is the camera frame x-axis.
struct CameraCcd {
  double width = 0.0;
  double height = 0.0;
  double focal = 0.0;
};

struct RobotModel {
  BaseLimits base_limits;
  std::vector<ArmJoint> arm_joints;
  Transform3d arm_mount_transform;
  /// Flange/tool offset after the last arm joint.
  Transform3d tool_transform;
  std::vector<LinkVolume> link_volumes;
  Transform3d camera_transform;
  CameraCcd camera_ccd;

  int arm_dof() const { return static_cast<int>(arm_joints.size()); }
  int total_dof() const { return arm_dof() + 3; }
};

struct Scene {
  std::vector<ConvexVolume> obstacles;
  std::vector<ForbiddenArea> forbidden_areas;
  Sun sun;
  Vec3 target_position = Vec3::Zero();
};

struct FixedJoint {
  int arm_joint_index = 0;
  double value = 0.0;
  bool operator==(const FixedJoint&) const = default;
};

struct Waypoint {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Quat orientation = Quat::Identity();
  std::vector<FixedJoint> fixed_joints;

  Transform3d pose() const { return {orientation, position}; }
};

struct TaskTrajectory {
  std::vector<Waypoint> waypoints;

  double duration() const { return waypoints.empty() ? 0.0 : waypoints.back().t; }
  /// Index of the last waypoint (N).
  int last_index() const { return static_cast<int>(waypoints.size()) - 1; }
  int task_dimension() const {
    return waypoints.empty() ? 6 : 6 + static_cast<int>(waypoints.front().fixed_joints.size());
  }
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool operator==(const Interval&) const = default;
};

struct GridConfig {
  double dx = 0.1;
  double dy = 0.1;
  double dh = 0.2;
  std::optional<Interval> x_range;
  std::optional<Interval> y_range;
  std::optional<Interval> h_range;
};

struct IkConfig {
  /// Convergence threshold inside the solver.
  double residual_tol = 1e-8;
  /// Residual a returned solution must satisfy.
  double accept_tol = 1e-6;
  int max_branches = 8;
  int max_iterations = 60;
  /// Lattice levels per free joint for the seed set.
  int seeds_per_joint = 2;
};

struct SmoothingConfig {
  /// Quadrature/constraint samples per waypoint interval (M).
  int samples_per_interval = 10;
  int max_iterations = 40;
  int max_outer_rounds = 6;
  double constraint_tol = 1e-6;
  double initial_penalty = 10.0;
};

struct PlannerConfig {
  GridConfig grid;
  double sigma = 0.95;
  IkConfig ik;
  SmoothingConfig smoothing;
  std::optional<double> rolling_heading_tol;
  /// Per-rate weights for the velocity-norm index, ordered x, y, h, arm...
  std::optional<VecX> snv_weights;

  double heading_tolerance() const { return rolling_heading_tol.value_or(0.5 * grid.dh); }
};

/// q = [q_b; q_a]. The heading is kept in (-pi, pi].
struct JointConfig {
  BasePose base;
  VecX arm;

  JointConfig() = default;
  JointConfig(const BasePose& b, VecX a) : base{b.x, b.y, normalize_angle(b.h)}, arm(std::move(a)) {}

  /// Stacked vector (x, y, h, arm...).
  VecX stacked() const {
    VecX q(3 + arm.size());
    q << base.x, base.y, base.h, arm;
    return q;
  }
};

/// Rates in the same order as JointConfig::stacked().
struct JointRates {
  VecX base = VecX::Zero(3);
  VecX arm;

  VecX stacked() const {
    VecX v(3 + arm.size());
    v << base, arm;
    return v;
  }
};

struct CostBreakdown {
  double total = 0.0;
  double tv = 0.0;
  double snv = 0.0;
};

struct DiscreteTrajectory {
  std::vector<double> times;
  std::vector<JointConfig> configs;
};

struct SplineTrajectory {
  BaseProfile base;
  ClampedCubicBSpline<double> arm;
};

struct JointTrajectory {
  std::variant<DiscreteTrajectory, SplineTrajectory> representation;
  std::optional<CostBreakdown> cost_report;

  bool is_spline() const { return std::holds_alternative<SplineTrajectory>(representation); }
  double start_time() const;
  double end_time() const;
};

/// Thrown when domain objects fail validation; carries every violation.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

std::vector<std::string> validate_model(const RobotModel& model);
std::vector<std::string> validate_scene(const Scene& scene, const TaskTrajectory& task,
                                        const RobotModel* model = nullptr);
std::vector<std::string> validate_config(const PlannerConfig& config);

/// Throws ValidationError unless every invariant holds.
void require_valid(const RobotModel& model, const Scene& scene, const TaskTrajectory& task,
                   const PlannerConfig& config);

/// Ray from the target toward the (infinitely distant) sun.
Ray sun_ray(const Scene& scene);

}  // namespace optiwb
