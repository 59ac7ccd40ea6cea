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

#include "optiwb/ddp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "optiwb/constraints.hpp"
#include "optiwb/kinematics.hpp"
#include "optiwb/objective.hpp"

namespace optiwb {
namespace {

constexpr double kSlack = 1e-9;

std::vector<double> multiples(double lo, double hi, double step) {
  std::vector<double> out;
  const long first = static_cast<long>(std::ceil(lo / step - 1e-9));
  const long last = static_cast<long>(std::floor(hi / step + 1e-9));
  for (long k = first; k <= last; ++k) out.push_back(static_cast<double>(k) * step);
  return out;
}

std::string describe(const std::map<std::string, std::size_t>& counts) {
  std::ostringstream out;
  bool first = true;
  for (const auto& [k, v] : counts) {
    out << (first ? "" : ", ") << k << "=" << v;
    first = false;
  }
  return out.str();
}

template <typename Fn>
void parallel_chunks(std::size_t count, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), std::max<std::size_t>(count, 1));
  if (workers <= 1) {
    fn(std::size_t{0}, std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> threads;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = std::min(count, w * chunk);
    const std::size_t hi = std::min(count, lo + chunk);
    threads.emplace_back([&fn, w, lo, hi] { fn(w, lo, hi); });
  }
  for (std::thread& t : threads) t.join();
}

double end_effector_reach(const RobotModel& model) {
  double reach = model.arm_mount_transform.translation.head<2>().norm() + model.tool_transform.translation.norm();
  for (const ArmJoint& j : model.arm_joints) reach += j.origin.translation.norm();
  return reach;
}

}  // namespace

int worker_count() {
  if (const char* env = std::getenv("OPTIWB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

InfeasibleStageError::InfeasibleStageError(StageStats stats)
    : std::runtime_error("infeasible stage " + std::to_string(stats.waypoint) + ": no feasible node among " +
                         std::to_string(stats.grid_points) + " grid points (pruned: " + describe(stats.pruned) + ")"),
      stats_(std::move(stats)) {}

DisconnectedError::DisconnectedError(int stage, std::map<std::string, std::size_t> edges_pruned)
    : std::runtime_error("disconnected at stage " + std::to_string(stage) +
                         ": no feasible edge from the previous stage (edges pruned: " + describe(edges_pruned) + ")"),
      stage_(stage),
      edges_pruned_(std::move(edges_pruned)) {}

RedundancyGrid RedundancyGrid::from_config(const GridConfig& config, const TaskTrajectory& task,
                                           const RobotModel& model) {
  Interval xr{0, 0}, yr{0, 0};
  if (!config.x_range || !config.y_range) {
    if (task.waypoints.empty()) throw std::invalid_argument("grid ranges need a task or explicit ranges");
    double xlo = task.waypoints.front().position.x(), xhi = xlo;
    double ylo = task.waypoints.front().position.y(), yhi = ylo;
    for (const Waypoint& w : task.waypoints) {
      xlo = std::min(xlo, w.position.x());
      xhi = std::max(xhi, w.position.x());
      ylo = std::min(ylo, w.position.y());
      yhi = std::max(yhi, w.position.y());
    }
    const double r = end_effector_reach(model);
    xr = {xlo - r, xhi + r};
    yr = {ylo - r, yhi + r};
  }
  if (config.x_range) xr = *config.x_range;
  if (config.y_range) yr = *config.y_range;
  RedundancyGrid grid;
  grid.x_values = multiples(xr.lo, xr.hi, config.dx);
  grid.y_values = multiples(yr.lo, yr.hi, config.dy);
  const Interval hr = config.h_range.value_or(Interval{-std::numbers::pi, std::numbers::pi});
  for (double h : multiples(std::max(hr.lo, -std::numbers::pi), std::min(hr.hi, std::numbers::pi), config.dh))
    if (h > -std::numbers::pi && h <= std::numbers::pi) grid.h_values.push_back(h);
  if (grid.x_values.empty() || grid.y_values.empty() || grid.h_values.empty())
    throw std::invalid_argument("redundancy grid is empty for the configured ranges");
  return grid;
}

std::vector<DPNode> build_stage_nothrow(const RobotModel& model, const Scene& scene, const TaskTrajectory& task,
                                        const RedundancyGrid& grid, int i, const IkConfig& ik, StageStats& stats) {
  if (i < 0 || i > task.last_index()) throw std::out_of_range("stage index " + std::to_string(i) + " out of range");
  const Waypoint& wp = task.waypoints[i];
  const bool is_final = i == task.last_index();
  std::vector<int> fixed_indices;
  for (const FixedJoint& f : wp.fixed_joints) fixed_indices.push_back(f.arm_joint_index);
  const IkSolver solver(model, ik, fixed_indices);
  const Transform3d pose = wp.pose();
  const double reach = end_effector_reach(model);

  const std::size_t nx = grid.x_values.size();
  const std::size_t ny = grid.y_values.size();
  const std::size_t cells = nx * ny;
  const std::size_t workers = static_cast<std::size_t>(worker_count());
  std::vector<std::vector<DPNode>> partial(workers);
  std::vector<std::map<std::string, std::size_t>> pruned(workers);

  parallel_chunks(cells, [&](std::size_t w, std::size_t lo, std::size_t hi) {
    auto& out = partial[w];
    auto& counts = pruned[w];
    for (std::size_t c = lo; c < hi; ++c) {
      const int jx = static_cast<int>(c / ny);
      const int jy = static_cast<int>(c % ny);
      const double x = grid.x_values[jx];
      const double y = grid.y_values[jy];
      if (std::hypot(wp.position.x() - x, wp.position.y() - y) > reach + kSlack) {
        counts["unreachable"] += grid.h_values.size();
        continue;
      }
      for (int jh = 0; jh < static_cast<int>(grid.h_values.size()); ++jh) {
        const BasePose nu{x, y, grid.h_values[jh]};
        if (!solver.maybe_reachable(pose, nu)) {
          ++counts["unreachable"];
          continue;
        }
        const ConstraintReport base = check_base_placement(model, scene, nu, is_final);
        if (!base.feasible()) {
          ++counts[base.violations.front().constraint_id];
          continue;
        }
        const IkSolutionSet set = solver.solve(pose, wp.fixed_joints, nu);
        if (set.solutions.empty()) {
          ++counts[set.rejected_by_limits > 0 ? std::string(constraint::kJointPosition) : "unreachable"];
          continue;
        }
        counts[std::string(constraint::kJointPosition)] += static_cast<std::size_t>(set.rejected_by_limits);
        for (const IkSolution& s : set.solutions) {
          const ConstraintReport arm = check_arm_placement(model, scene, s.config, is_final);
          if (!arm.feasible()) {
            ++counts[arm.violations.front().constraint_id];
            continue;
          }
          DPNode node;
          node.waypoint = i;
          node.grid = {jx, jy, jh};
          node.branch_id = s.branch_id;
          node.config = s.config;
          out.push_back(std::move(node));
        }
      }
    }
  });

  std::vector<DPNode> nodes;
  stats = StageStats{};
  stats.waypoint = i;
  stats.grid_points = grid.size();
  for (std::size_t w = 0; w < workers; ++w) {
    for (DPNode& n : partial[w]) nodes.push_back(std::move(n));
    for (const auto& [k, v] : pruned[w]) stats.pruned[k] += v;
  }
  stats.nodes = nodes.size();
  return nodes;
}

std::vector<DPNode> build_stage(const RobotModel& model, const Scene& scene, const TaskTrajectory& task,
                                const RedundancyGrid& grid, int i, const IkConfig& ik, StageStats* stats) {
  StageStats local;
  std::vector<DPNode> nodes = build_stage_nothrow(model, scene, task, grid, i, ik, local);
  if (stats != nullptr) *stats = local;
  if (nodes.empty()) throw InfeasibleStageError(local);
  return nodes;
}

DPSolution dp_solve(const RobotModel& model, const Scene& scene, const TaskTrajectory& task,
                    const PlannerConfig& config) {
  require_valid(model, scene, task, config);
  const RedundancyGrid grid = RedundancyGrid::from_config(config.grid, task, model);
  std::vector<std::vector<DPNode>> stages;
  std::vector<StageStats> stats;
  for (int i = 0; i <= task.last_index(); ++i) {
    StageStats s;
    stages.push_back(build_stage_nothrow(model, scene, task, grid, i, config.ik, s));
    stats.push_back(s);
    if (stages.back().empty()) throw InfeasibleStageError(s);
  }
  DPSolution solution = dp_solve_stages(model, scene, task, config, std::move(stages));
  for (std::size_t i = 0; i < stats.size(); ++i) {
    stats[i].connected = solution.stats.stages[i].connected;
  }
  solution.stats.stages = std::move(stats);
  return solution;
}

namespace {

enum EdgeFailure { kOk = 0, kRolling, kTiming, kBaseSpeed, kTurnRate, kVelocity, kAcceleration, kFailureCount };
constexpr const char* kFailureNames[] = {"", "heading_misaligned", "timing", "base_speed",
                                         "base_turn_rate", "joint_velocity", "joint_acceleration"};

// Mirrors check_rolling followed by check_differential, without allocation.
EdgeFailure edge_check(const RobotModel& model, const JointConfig& prev, const JointConfig& q,
                       const JointConfig* prev2, double dt, double dt_prev, double tol) {
  const double dx = q.base.x - prev.base.x;
  const double dy = q.base.y - prev.base.y;
  const double dist = std::hypot(dx, dy);
  if (dist > 1e-9) {
    const double theta = std::atan2(dy, dx);
    if (std::abs(angle_difference(q.base.h, theta)) > tol + 1e-12) return kRolling;
  }
  if (maneuver_time(prev.base, q.base, model.base_limits) > dt * (1.0 + 1e-12)) return kTiming;
  if (dist / dt > model.base_limits.v_max + kSlack) return kBaseSpeed;
  if (std::abs(angle_difference(q.base.h, prev.base.h)) / dt > model.base_limits.omega_max + kSlack) return kTurnRate;
  for (int k = 0; k < model.arm_dof(); ++k)
    if (std::abs(q.arm[k] - prev.arm[k]) / dt > model.arm_joints[k].vel_max + kSlack) return kVelocity;
  if (prev2 != nullptr) {
    for (int k = 0; k < model.arm_dof(); ++k) {
      const double v = (q.arm[k] - prev.arm[k]) / dt;
      const double v_prev = (prev.arm[k] - prev2->arm[k]) / dt_prev;
      if (std::abs(v - v_prev) / dt > model.arm_joints[k].acc_max + kSlack) return kAcceleration;
    }
  }
  return kOk;
}

// Velocity-norm part of stage_cost.
double rate_cost(const JointConfig& prev, const JointConfig& q, double dt, const VecX* weights) {
  const double rx = (q.base.x - prev.base.x) / dt;
  const double ry = (q.base.y - prev.base.y) / dt;
  const double rh = angle_difference(q.base.h, prev.base.h) / dt;
  double sum = 0.0;
  if (weights == nullptr) {
    sum = rx * rx + ry * ry + rh * rh + ((q.arm - prev.arm) / dt).squaredNorm();
  } else {
    sum = (*weights)[0] * rx * rx + (*weights)[1] * ry * ry + (*weights)[2] * rh * rh +
          ((q.arm - prev.arm) / dt).cwiseAbs2().dot(weights->tail(q.arm.size()));
  }
  return sum * dt;
}

}  // namespace

DPSolution dp_solve_stages(const RobotModel& model, const Scene& scene, const TaskTrajectory& task,
                           const PlannerConfig& config, std::vector<std::vector<DPNode>> stages) {
  const double sigma = config.sigma;
  const VecX* weights = config.snv_weights ? &*config.snv_weights : nullptr;
  const double tol = config.heading_tolerance();
  DPSolution solution;
  DPStats& stats = solution.stats;
  stats.stages.resize(stages.size());

  for (DPNode& n : stages.front()) {
    n.tv = tv_cost(model, n.config.base, scene.target_position);
    n.snv = 0.0;
    n.best_cost = sigma * n.tv;
    n.best_predecessor = -1;
  }
  stats.nodes_expanded += stages.front().size();
  stats.stages[0].connected = stages.front().size();
  stats.stages[0].nodes = stages.front().size();

  for (std::size_t i = 1; i < stages.size(); ++i) {
    const std::vector<DPNode>& prev = stages[i - 1];
    std::vector<DPNode>& cur = stages[i];
    const double dt = task.waypoints[i].t - task.waypoints[i - 1].t;
    const double dt_prev = i >= 2 ? task.waypoints[i - 1].t - task.waypoints[i - 2].t : dt;
    const std::vector<DPNode>* prev2_stage = i >= 2 ? &stages[i - 2] : nullptr;

    // Bucket reached predecessors by base cell.
    std::map<std::pair<int, int>, std::vector<int>> buckets;
    for (int p = 0; p < static_cast<int>(prev.size()); ++p)
      if (std::isfinite(prev[p].best_cost)) buckets[{prev[p].grid.jx, prev[p].grid.jy}].push_back(p);
    const double radius = model.base_limits.v_max * dt + 1e-9;

    const std::size_t workers = static_cast<std::size_t>(worker_count());
    std::vector<std::array<std::size_t, kFailureCount>> failures(workers);
    std::vector<std::size_t> evaluated(workers, 0);
    for (auto& f : failures) f.fill(0);

    parallel_chunks(cur.size(), [&](std::size_t w, std::size_t lo, std::size_t hi) {
      for (std::size_t c = lo; c < hi; ++c) {
        DPNode& node = cur[c];
        const double tv_stage = tv_cost(model, node.config.base, scene.target_position) * dt;
        double best = std::numeric_limits<double>::infinity();
        int best_p = -1;
        double best_snv = 0.0;
        for (const auto& [cell, members] : buckets) {
          const DPNode& sample = prev[members.front()];
          const double dx = node.config.base.x - sample.config.base.x;
          const double dy = node.config.base.y - sample.config.base.y;
          if (std::hypot(dx, dy) > radius) {
            failures[w][kBaseSpeed] += members.size();
            evaluated[w] += members.size();
            continue;
          }
          for (const int p : members) {
            ++evaluated[w];
            const DPNode& pred = prev[p];
            const JointConfig* prev2 =
                pred.best_predecessor >= 0 ? &(*prev2_stage)[pred.best_predecessor].config : nullptr;
            const EdgeFailure f = edge_check(model, pred.config, node.config, prev2, dt, dt_prev, tol);
            if (f != kOk) {
              ++failures[w][f];
              continue;
            }
            const double snv = rate_cost(pred.config, node.config, dt, weights);
            const double total = pred.best_cost + sigma * tv_stage + (1.0 - sigma) * snv;
            if (total < best || (total == best && p < best_p)) {
              best = total;
              best_p = p;
              best_snv = snv;
            }
          }
        }
        node.best_cost = best;
        node.best_predecessor = best_p;
        if (best_p >= 0) {
          node.tv = prev[best_p].tv + tv_stage;
          node.snv = prev[best_p].snv + best_snv;
        }
      }
    });

    std::map<std::string, std::size_t> pruned;
    for (std::size_t w = 0; w < workers; ++w) {
      stats.edges_evaluated += evaluated[w];
      for (int f = 1; f < kFailureCount; ++f) {
        if (failures[w][f] == 0) continue;
        pruned[kFailureNames[f]] += failures[w][f];
        stats.edges_pruned[kFailureNames[f]] += failures[w][f];
      }
    }
    std::size_t connected = 0;
    for (const DPNode& n : cur)
      if (n.best_predecessor >= 0) ++connected;
    stats.stages[i].waypoint = static_cast<int>(i);
    stats.stages[i].nodes = cur.size();
    stats.stages[i].connected = connected;
    stats.nodes_expanded += cur.size();
    if (connected == 0) throw DisconnectedError(static_cast<int>(i), pruned);
  }
  std::size_t pruned_total = 0;
  for (const auto& [k, v] : stats.edges_pruned) pruned_total += v;
  stats.edges_feasible = stats.edges_evaluated - pruned_total;

  // Cheapest final node; node lists are in tie-break order.
  const std::vector<DPNode>& last = stages.back();
  int best = -1;
  for (int n = 0; n < static_cast<int>(last.size()); ++n)
    if (std::isfinite(last[n].best_cost) && (best < 0 || last[n].best_cost < last[best].best_cost)) best = n;

  const std::size_t count = stages.size();
  solution.trajectory.times.resize(count);
  solution.trajectory.configs.resize(count);
  solution.grid_path.resize(count);
  solution.branch_path.resize(count);
  int idx = best;
  for (std::size_t k = count; k-- > 0;) {
    const DPNode& n = stages[k][idx];
    solution.trajectory.times[k] = task.waypoints[k].t;
    solution.trajectory.configs[k] = n.config;
    solution.grid_path[k] = n.grid;
    solution.branch_path[k] = n.branch_id;
    idx = n.best_predecessor;
  }
  const DPNode& end = last[best];
  solution.cost = {end.best_cost, end.tv, end.snv};
  return solution;
}

}  // namespace optiwb
