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

#include "optiwb/model.hpp"

namespace optiwb {

/// 1 - x_cam . eta, eta the unit vector from the camera to the target.
double tv_cost(const RobotModel& model, const BasePose& base, const Vec3& target);

/// Squared norm of the joint rates, optionally weighted per component
/// (order x, y, h, arm...).
double snv_cost(const VecX& q_dot, const VecX* weights = nullptr);

double phi(const RobotModel& model, const Scene& scene, const JointConfig& q, const VecX& q_dot, double sigma,
           const VecX* weights = nullptr);

/// Cost of the initial configuration: phi at zero velocity.
double initial_cost(const RobotModel& model, const Scene& scene, const JointConfig& q0, double sigma);

/// Stage term of the discrete objective: phi at the backward-difference
/// rate, times the stage duration.
CostBreakdown stage_cost(const RobotModel& model, const Scene& scene, const JointConfig& q_prev, const JointConfig& q,
                         double dt, double sigma, const VecX* weights = nullptr);

/// Discrete trajectories: l(q0) plus the stage sum. Spline trajectories: the
/// integral of phi, arm rates and visibility by composite Simpson at
/// `samples_per_interval` nodes per waypoint interval, base rates exactly
/// (they are piecewise constant).
CostBreakdown trajectory_cost(const RobotModel& model, const Scene& scene, const JointTrajectory& traj, double sigma,
                              int samples_per_interval, const VecX* weights = nullptr);

/// Composite Simpson weights for `intervals` equal steps of width `h`. Odd
/// counts close with the 3/8 rule; a single step falls back to trapezoid.
VecX simpson_weights(int intervals, double h);

}  // namespace optiwb
