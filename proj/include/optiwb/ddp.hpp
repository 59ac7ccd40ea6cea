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

#include <compare>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "optiwb/model.hpp"

namespace optiwb {

/// Sample values of the redundancy parameters (x, y, h). x and y are integer
/// multiples of their step, so halving a step yields a superset.
struct RedundancyGrid {
  std::vector<double> x_values;
  std::vector<double> y_values;
  std::vector<double> h_values;

  /// Explicit ranges from the config, else the task bounding box inflated by
  /// the reach from base center to end effector; h spans (-pi, pi].
  static RedundancyGrid from_config(const GridConfig& config, const TaskTrajectory& task, const RobotModel& model);

  std::size_t size() const { return x_values.size() * y_values.size() * h_values.size(); }
};

struct GridIndex {
  int jx = 0;
  int jy = 0;
  int jh = 0;
  auto operator<=>(const GridIndex&) const = default;
};

struct DPNode {
  int waypoint = 0;
  GridIndex grid;
  int branch_id = 0;
  JointConfig config;
  double best_cost = std::numeric_limits<double>::infinity();
  /// Index into the previous stage's node list; -1 at stage 0 or when unreached.
  int best_predecessor = -1;
  /// Accumulated visibility and velocity-norm integrals along the best path.
  double tv = 0.0;
  double snv = 0.0;
};

struct StageStats {
  int waypoint = 0;
  std::size_t grid_points = 0;
  std::size_t nodes = 0;
  /// Grid points or IK branches discarded, by the first constraint they broke.
  /// "unreachable" counts grid points with no IK solution.
  std::map<std::string, std::size_t> pruned;
  /// Nodes with at least one feasible incoming edge (stage > 0).
  std::size_t connected = 0;
};

struct DPStats {
  std::size_t nodes_expanded = 0;
  std::size_t edges_evaluated = 0;
  std::size_t edges_feasible = 0;
  std::map<std::string, std::size_t> edges_pruned;
  std::vector<StageStats> stages;
};

struct DPSolution {
  DiscreteTrajectory trajectory;
  std::vector<GridIndex> grid_path;
  std::vector<int> branch_path;
  CostBreakdown cost;
  DPStats stats;
};

class InfeasibleStageError : public std::runtime_error {
 public:
  explicit InfeasibleStageError(StageStats stats);
  int stage() const { return stats_.waypoint; }
  const StageStats& stats() const { return stats_; }

 private:
  StageStats stats_;
};

class DisconnectedError : public std::runtime_error {
 public:
  DisconnectedError(int stage, std::map<std::string, std::size_t> edges_pruned);
  int stage() const { return stage_; }
  const std::map<std::string, std::size_t>& edges_pruned() const { return edges_pruned_; }

 private:
  int stage_;
  std::map<std::string, std::size_t> edges_pruned_;
};

/// Candidate nodes of waypoint i: every IK branch at every grid point that
/// passes the positional constraints (with the shadow test at the last
/// waypoint), in (jx, jy, jh, branch) order. Costs are left unset.
/// Throws InfeasibleStageError when nothing survives.
std::vector<DPNode> build_stage(const RobotModel& model, const Scene& scene, const TaskTrajectory& task,
                                const RedundancyGrid& grid, int i, const IkConfig& ik = {},
                                StageStats* stats = nullptr);

/// Like build_stage but reports an empty stage through the stats instead of throwing.
std::vector<DPNode> build_stage_nothrow(const RobotModel& model, const Scene& scene, const TaskTrajectory& task,
                                        const RedundancyGrid& grid, int i, const IkConfig& ik, StageStats& stats);

/// Forward dynamic programming over the grid, then backtracking from the
/// cheapest final node. Ties go to the lexicographically smallest
/// (jx, jy, jh, branch).
DPSolution dp_solve(const RobotModel& model, const Scene& scene, const TaskTrajectory& task,
                    const PlannerConfig& config);

/// Same, over precomputed stages (used by tests that construct graphs directly).
DPSolution dp_solve_stages(const RobotModel& model, const Scene& scene, const TaskTrajectory& task,
                           const PlannerConfig& config, std::vector<std::vector<DPNode>> stages);

/// Worker count from OPTIWB_THREADS (default 1).
int worker_count();

}  // namespace optiwb
