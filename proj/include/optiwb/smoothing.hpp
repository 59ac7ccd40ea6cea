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
#include <vector>

#include "optiwb/constraints.hpp"
#include "optiwb/ddp.hpp"
#include "optiwb/model.hpp"
#include "optiwb/trajectory.hpp"

namespace optiwb {

class SmoothingError : public std::runtime_error {
 public:
  SmoothingError(const std::string& what, std::optional<JointTrajectory> best_effort = std::nullopt,
                 ConstraintReport report = {});
  const std::optional<JointTrajectory>& best_effort() const { return best_effort_; }
  const ConstraintReport& report() const { return report_; }

 private:
  std::optional<JointTrajectory> best_effort_;
  ConstraintReport report_;
};

struct SmoothingStats {
  int iterations = 0;
  int evaluations = 0;
  int rounds = 0;
  /// A feasible iterate at least as cheap as the seed was found.
  bool converged = false;
  /// Violations of the interpolated seed at 2M density.
  int seed_violations = 0;
  /// Largest violation magnitude of the returned trajectory at 2M density.
  double max_violation = 0.0;
  /// Largest end-effector distance from the piecewise-linear task path
  /// between waypoints (diagnostic; the task is exact at waypoints).
  double max_task_deviation = 0.0;
};

struct SmoothingResult {
  JointTrajectory trajectory;
  std::vector<BasePose> knots;
  CostBreakdown cost;
  CostBreakdown seed_cost;
  SmoothingStats stats;
};

/// Arm values at the waypoints come from the redundancy-parametrised IK at
/// each knot, continuing from `reference_arms` (or from the previous knot
/// when absent), and are interpolated by a rest-to-rest clamped cubic
/// spline. The base follows the turn-drive-turn profile through the knots.
/// Throws SmoothingError on IK failure or when a base interval cannot fit.
JointTrajectory interpolate_seed(const RobotModel& model, const TaskTrajectory& task,
                                 const std::vector<BasePose>& nu_knots, const PlannerConfig& config,
                                 const std::vector<VecX>* reference_arms = nullptr);

/// Local optimisation of the base knots from the DP solution: penalised
/// objective, quasi-Newton inner solves, penalty doubling between rounds.
/// Returns the cheapest iterate that passes check_trajectory at twice the
/// optimisation density; never costlier than the interpolated seed.
SmoothingResult smooth_optimize(const RobotModel& model, const Scene& scene, const TaskTrajectory& task,
                                const DPSolution& dp_solution, const PlannerConfig& config);

double task_deviation(const RobotModel& model, const TaskTrajectory& task, const SplineTrajectory& traj,
                      int samples_per_interval);

}  // namespace optiwb
