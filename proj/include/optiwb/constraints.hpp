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

#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "optiwb/model.hpp"

namespace optiwb {

namespace constraint {
inline constexpr std::string_view kJointPosition = "joint_position";
inline constexpr std::string_view kJointVelocity = "joint_velocity";
inline constexpr std::string_view kJointAcceleration = "joint_acceleration";
inline constexpr std::string_view kBaseSpeed = "base_speed";
inline constexpr std::string_view kBaseTurnRate = "base_turn_rate";
inline constexpr std::string_view kHeadingMisaligned = "heading_misaligned";
inline constexpr std::string_view kTiming = "timing";
inline constexpr std::string_view kCollision = "collision";
inline constexpr std::string_view kSelfCollision = "self_collision";
inline constexpr std::string_view kForbiddenArea = "forbidden_area";
inline constexpr std::string_view kOvershadow = "overshadow";
}  // namespace constraint

struct Violation {
  std::string constraint_id;
  /// Waypoint index, or -1 when the violation is located by time only.
  int waypoint = -1;
  double time = std::numeric_limits<double>::quiet_NaN();
  double magnitude = 0.0;
  /// Joint name, link pair, interval, ...
  std::string detail;
};

struct ConstraintReport {
  std::vector<Violation> violations;

  bool feasible() const { return violations.empty(); }
  bool contains(std::string_view id) const;
  std::size_t count(std::string_view id) const;
  double max_magnitude() const;
  /// Sum of squared magnitudes.
  double squared_magnitude() const;

  void add(std::string_view id, double magnitude, std::string detail = {});
  /// Appends `other`, stamping the location on entries that have none.
  void append(const ConstraintReport& other, int waypoint = -1,
              double time = std::numeric_limits<double>::quiet_NaN());
};

/// Link volumes in world coordinates, in model order.
std::vector<ConvexVolume> posed_link_volumes(const RobotModel& model, const JointConfig& q);

/// Arm joint box.
ConstraintReport check_joint_limits(const RobotModel& model, const VecX& arm);

/// Everything decided by the base pose alone: base center vs forbidden
/// areas, base-rigid volumes vs obstacles and, when final, vs the sun ray.
/// A positive margin flags clearances below it (magnitude = shortfall).
ConstraintReport check_base_placement(const RobotModel& model, const Scene& scene, const BasePose& base,
                                      bool is_final, double margin = 0.0);

/// Arm-link volumes vs obstacles, non-adjacent self-collision (including
/// arm vs base volumes) and, when final, arm links vs the sun ray.
ConstraintReport check_arm_placement(const RobotModel& model, const Scene& scene, const JointConfig& q,
                                     bool is_final, double margin = 0.0);

/// Set A(t): joint bounds, obstacle and self collision, forbidden areas and
/// the final-waypoint shadow test.
ConstraintReport check_positional(const RobotModel& model, const Scene& scene, const JointConfig& q, bool is_final,
                                  double margin = 0.0);

/// Backward-difference velocity limits, plus acceleration limits when the
/// second predecessor is given. `dt_prev` defaults to `dt`.
ConstraintReport check_differential(const RobotModel& model, const JointConfig& q_prev, const JointConfig& q,
                                    const JointConfig* q_prev2, double dt, double dt_prev = 0.0);

/// Discrete pure rolling: turn in place, or rotate to the travel direction,
/// drive, and finish within `tol` of it, all inside `dt`.
ConstraintReport check_rolling(const JointConfig& q_prev, const JointConfig& q, double dt, const RobotModel& model,
                               double tol);

bool in_B(const RobotModel& model, const Scene& scene, const JointConfig& q, const JointConfig* q_prev,
          const JointConfig* q_prev2, double dt, bool is_final, double heading_tol);

/// Dense verification. Spline trajectories are sampled at
/// `samples_per_interval` points per waypoint interval; discrete ones are
/// checked waypoint by waypoint with finite differences.
ConstraintReport check_trajectory(const RobotModel& model, const Scene& scene, const JointTrajectory& traj,
                                  int samples_per_interval, double heading_tol);

/// Positive inside forbidden areas (depth), negative outside (distance,
/// searched no farther than `reach`).
double forbidden_signed_distance(const Vec2& p, const std::vector<ForbiddenArea>& areas, double reach);

}  // namespace optiwb
