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

#include <chrono>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "optiwb/constraints.hpp"
#include "optiwb/ddp.hpp"
#include "optiwb/io.hpp"
#include "optiwb/objective.hpp"
#include "optiwb/smoothing.hpp"
#include "optiwb/trajectory.hpp"

namespace {

using namespace optiwb;

enum Exit { kOk = 0, kInputError = 1, kInfeasible = 2, kViolations = 3 };

struct PlanArgs {
  std::string problem;
  std::string out = "plan.json";
  std::string traces;
  bool ddp_only = false;
  std::optional<double> sigma;
  std::optional<double> dx, dy, dh;
  std::optional<int> samples;
  double sample_rate = 10.0;
};

struct ValidateArgs {
  std::string plan;
  std::string problem;
  std::optional<int> samples;
};

struct ExportArgs {
  std::string plan;
  std::string problem;
  std::string out = "traces.csv";
  double sample_rate = 10.0;
};

struct GridArgs {
  std::string problem;
  std::optional<int> stage;
  std::optional<double> dx, dy, dh;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print_errors(const std::vector<std::string>& errors) {
  for (const std::string& e : errors) std::cerr << "error: " << e << "\n";
}

void print_costs(const char* label, const CostBreakdown& c) {
  std::printf("%-10s %14.6f %14.6f %14.6f\n", label, c.total, c.tv, c.snv);
}

void print_pruning(const std::map<std::string, std::size_t>& pruned) {
  for (const auto& [id, n] : pruned) std::cerr << "    " << id << ": " << n << "\n";
}

void print_violations(const ConstraintReport& report, std::size_t limit = 50) {
  std::printf("%-20s %9s %12s %14s  %s\n", "constraint", "waypoint", "time", "magnitude", "detail");
  for (std::size_t i = 0; i < report.violations.size() && i < limit; ++i) {
    const Violation& v = report.violations[i];
    std::printf("%-20s %9d %12.4f %14.6g  %s\n", v.constraint_id.c_str(), v.waypoint, v.time, v.magnitude,
                v.detail.c_str());
  }
  if (report.violations.size() > limit)
    std::printf("... %zu more\n", report.violations.size() - limit);
}

// Overrides shadow file values and are echoed for provenance.
void apply_grid_overrides(PlannerConfig& config, const std::optional<double>& dx, const std::optional<double>& dy,
                          const std::optional<double>& dh) {
  if (dx) config.grid.dx = *dx;
  if (dy) config.grid.dy = *dy;
  if (dh) config.grid.dh = *dh;
}

void print_header(const Problem& p, const RedundancyGrid& grid) {
  const PlannerConfig& c = p.config;
  std::cerr << "waypoints " << p.task.waypoints.size() << ", t_f " << p.task.duration() << " s\n"
            << "grid dx " << c.grid.dx << " dy " << c.grid.dy << " dh " << c.grid.dh << " -> "
            << grid.x_values.size() << " x " << grid.y_values.size() << " x " << grid.h_values.size() << "\n"
            << "sigma " << c.sigma << ", samples per interval " << c.smoothing.samples_per_interval
            << ", threads " << worker_count() << "\n";
}

int cmd_plan(const PlanArgs& a) {
  Problem p;
  try {
    p = load_problem(a.problem);
    if (a.sigma) p.config.sigma = *a.sigma;
    apply_grid_overrides(p.config, a.dx, a.dy, a.dh);
    if (a.samples) p.config.smoothing.samples_per_interval = *a.samples;
    const auto issues = validate_config(p.config);
    if (!issues.empty()) throw ParseError(issues);
    if (!(a.sample_rate > 0.0)) throw ParseError({"--seed-sample-rate: must be positive"});
  } catch (const ParseError& e) {
    print_errors(e.errors());
    return kInputError;
  } catch (const IoError& e) {
    print_errors({e.what()});
    return kInputError;
  }

  const RedundancyGrid grid = RedundancyGrid::from_config(p.config.grid, p.task, p.model);
  print_header(p, grid);
  const auto t0 = std::chrono::steady_clock::now();
  DPSolution dp;
  try {
    dp = dp_solve(p.model, p.scene, p.task, p.config);
  } catch (const InfeasibleStageError& e) {
    std::cerr << "infeasible: no admissible node at waypoint " << e.stage() << " (" << e.stats().grid_points
              << " grid points)\n";
    print_pruning(e.stats().pruned);
    return kInfeasible;
  } catch (const DisconnectedError& e) {
    std::cerr << "infeasible: no admissible transition into waypoint " << e.stage() << "\n";
    print_pruning(e.edges_pruned());
    return kInfeasible;
  } catch (const ValidationError& e) {
    print_errors(e.violations());
    return kInputError;
  }
  std::cerr << "dp: " << dp.stats.nodes_expanded << " nodes, " << dp.stats.edges_feasible << " of "
            << dp.stats.edges_evaluated << " edges feasible, " << seconds_since(t0) << " s\n";

  std::printf("%-10s %14s %14s %14s\n", "stage", "total", "I_TV", "I_SNV");
  print_costs("dp", dp.cost);
  Plan plan;
  std::optional<SmoothingResult> smoothed;
  if (a.ddp_only) {
    plan = make_plan(dp, a.sample_rate);
  } else {
    const auto t1 = std::chrono::steady_clock::now();
    try {
      smoothed = smooth_optimize(p.model, p.scene, p.task, dp, p.config);
    } catch (const SmoothingError& e) {
      std::cerr << "infeasible: " << e.what() << "\n";
      print_violations(e.report(), 10);
      return kInfeasible;
    }
    std::cerr << "smoothing: " << smoothed->stats.rounds << " rounds, " << smoothed->stats.iterations
              << " iterations, " << seconds_since(t1) << " s, seed violations " << smoothed->stats.seed_violations
              << "\n";
    print_costs("seed", smoothed->seed_cost);
    print_costs("smoothed", smoothed->cost);
    plan = make_plan(*smoothed, a.sample_rate, &dp);
  }
  try {
    save_plan(a.out, plan);
    if (!a.traces.empty()) {
      const VecX* weights = p.config.snv_weights ? &*p.config.snv_weights : nullptr;
      export_traces(a.traces, plan.trajectory(), p.scene, p.model, a.sample_rate, weights);
    }
  } catch (const IoError& e) {
    print_errors({e.what()});
    return kInputError;
  }
  std::cerr << "wrote " << a.out << "\n";
  return kOk;
}

// Loads both files and checks they belong together.
bool load_pair(const std::string& plan_path, const std::string& problem_path, Problem& p, Plan& plan) {
  try {
    p = load_problem(problem_path);
    plan = load_plan(plan_path);
  } catch (const ParseError& e) {
    print_errors(e.errors());
    return false;
  } catch (const IoError& e) {
    print_errors({e.what()});
    return false;
  }
  if (plan.problem_format != kSceneFormat) {
    print_errors({plan_path + ": problem_format '" + plan.problem_format + "' does not match '" + kSceneFormat + "'"});
    return false;
  }
  const JointTrajectory traj = plan.trajectory();
  const Eigen::Index dof = plan.spline ? plan.spline->arm.dimension() : plan.discrete->configs.front().arm.size();
  if (dof != p.model.arm_dof()) {
    print_errors({plan_path + ": plan has " + std::to_string(dof) + " arm joints, the robot " +
                  std::to_string(p.model.arm_dof())});
    return false;
  }
  if (std::abs(traj.end_time() - p.task.duration()) > 1e-9 || std::abs(traj.start_time()) > 1e-9) {
    print_errors({plan_path + ": plan time span does not match the task"});
    return false;
  }
  return true;
}

// Exported samples must agree with the trajectory they were taken from.
void check_samples(const Plan& plan, const RobotModel& model, ConstraintReport& report) {
  for (std::size_t i = 0; i < plan.samples.size() && i < plan.sample_times.size(); ++i) {
    const double t = plan.sample_times[i];
    const VecX& q = plan.samples[i];
    if (q.size() != model.total_dof()) {
      report.add("sample_mismatch", 1.0, "sample " + std::to_string(i) + " has the wrong width");
      report.violations.back().time = t;
      continue;
    }
    report.append(check_joint_limits(model, q.tail(model.arm_dof())), -1, t);
    VecX expected;
    if (plan.spline) {
      expected = eval_trajectory(*plan.spline, t).q.stacked();
    } else {
      expected = sample_discrete(*plan.discrete, t).first;
    }
    VecX diff = q - expected;
    diff[2] = angle_difference(q[2], expected[2]);
    if (diff.cwiseAbs().maxCoeff() > 1e-9) {
      report.add("sample_mismatch", diff.cwiseAbs().maxCoeff(), "sampled_trajectory.q[" + std::to_string(i) + "]");
      report.violations.back().time = t;
    }
  }
}

int cmd_validate(const ValidateArgs& a) {
  Problem p;
  Plan plan;
  if (!load_pair(a.plan, a.problem, p, plan)) return kInputError;
  const int m = a.samples.value_or(2 * p.config.smoothing.samples_per_interval);
  if (m < 1) {
    print_errors({"--samples: must be >= 1"});
    return kInputError;
  }
  const JointTrajectory traj = plan.trajectory();
  ConstraintReport report = check_trajectory(p.model, p.scene, traj, m, p.config.heading_tolerance());
  check_samples(plan, p.model, report);
  const VecX* weights = p.config.snv_weights ? &*p.config.snv_weights : nullptr;
  const CostBreakdown cost =
      trajectory_cost(p.model, p.scene, traj, p.config.sigma, p.config.smoothing.samples_per_interval, weights);
  std::printf("%-10s %14s %14s %14s\n", "", "total", "I_TV", "I_SNV");
  print_costs("stored", plan.cost);
  print_costs("recomputed", cost);
  if (!report.feasible()) {
    print_violations(report);
    return kViolations;
  }
  std::printf("no violations at %d samples per interval\n", m);
  return kOk;
}

int cmd_export(const ExportArgs& a) {
  Problem p;
  Plan plan;
  if (!load_pair(a.plan, a.problem, p, plan)) return kInputError;
  try {
    const VecX* weights = p.config.snv_weights ? &*p.config.snv_weights : nullptr;
    export_traces(a.out, plan.trajectory(), p.scene, p.model, a.sample_rate, weights);
  } catch (const IoError& e) {
    print_errors({e.what()});
    return kInputError;
  } catch (const std::invalid_argument& e) {
    print_errors({e.what()});
    return kInputError;
  }
  std::cerr << "wrote " << a.out << "\n";
  return kOk;
}

int cmd_grid_info(const GridArgs& a) {
  Problem p;
  try {
    p = load_problem(a.problem);
    apply_grid_overrides(p.config, a.dx, a.dy, a.dh);
    const auto issues = validate_config(p.config);
    if (!issues.empty()) throw ParseError(issues);
  } catch (const ParseError& e) {
    print_errors(e.errors());
    return kInputError;
  } catch (const IoError& e) {
    print_errors({e.what()});
    return kInputError;
  }
  const int last = p.task.last_index();
  if (a.stage && (*a.stage < 0 || *a.stage > last)) {
    print_errors({"--stage: must lie in [0, " + std::to_string(last) + "]"});
    return kInputError;
  }
  const RedundancyGrid grid = RedundancyGrid::from_config(p.config.grid, p.task, p.model);
  print_header(p, grid);
  const int lo = a.stage.value_or(0);
  const int hi = a.stage.value_or(last);
  std::printf("%-6s %12s %10s  %s\n", "stage", "grid_points", "nodes", "pruned");
  for (int i = lo; i <= hi; ++i) {
    StageStats stats;
    build_stage_nothrow(p.model, p.scene, p.task, grid, i, p.config.ik, stats);
    std::string pruned;
    for (const auto& [id, n] : stats.pruned) pruned += id + "=" + std::to_string(n) + " ";
    std::printf("%-6d %12zu %10zu  %s\n", i, stats.grid_points, stats.nodes, pruned.c_str());
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Whole-body motion planner for mobile manipulators"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "grid search followed by spline smoothing");
  plan_cmd->add_option("problem", plan.problem, "scene document")->required()->check(CLI::ExistingFile);
  plan_cmd->add_option("-o,--out", plan.out, "plan document to write");
  plan_cmd->add_option("--traces", plan.traces, "also write a CSV trace table");
  plan_cmd->add_flag("--ddp-only", plan.ddp_only, "skip smoothing");
  plan_cmd->add_option("--sigma", plan.sigma, "visibility weight in [0, 1]");
  plan_cmd->add_option("--dx", plan.dx, "grid step in x [m]");
  plan_cmd->add_option("--dy", plan.dy, "grid step in y [m]");
  plan_cmd->add_option("--dh", plan.dh, "grid step in heading [rad]");
  plan_cmd->add_option("--samples", plan.samples, "smoothing samples per waypoint interval");
  plan_cmd->add_option("--seed-sample-rate", plan.sample_rate, "rate of the sampled trajectory [Hz]");

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "re-check a plan against its problem");
  validate_cmd->add_option("plan", validate.plan)->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("problem", validate.problem)->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--samples", validate.samples, "samples per waypoint interval (default 2M)");

  ExportArgs exp;
  auto* export_cmd = app.add_subcommand("export", "write per-sample traces of a plan");
  export_cmd->add_option("plan", exp.plan)->required()->check(CLI::ExistingFile);
  export_cmd->add_option("problem", exp.problem)->required()->check(CLI::ExistingFile);
  export_cmd->add_option("-o,--out", exp.out, "CSV file to write");
  export_cmd->add_option("--rate", exp.sample_rate, "sample rate [Hz]")->check(CLI::PositiveNumber);

  GridArgs grid;
  auto* grid_cmd = app.add_subcommand("grid-info", "per-stage candidate counts and pruning");
  grid_cmd->add_option("problem", grid.problem)->required()->check(CLI::ExistingFile);
  grid_cmd->add_option("--stage", grid.stage, "single waypoint index");
  grid_cmd->add_option("--dx", grid.dx, "grid step in x [m]");
  grid_cmd->add_option("--dy", grid.dy, "grid step in y [m]");
  grid_cmd->add_option("--dh", grid.dh, "grid step in heading [rad]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  }

  try {
    if (*plan_cmd) return cmd_plan(plan);
    if (*validate_cmd) return cmd_validate(validate);
    if (*export_cmd) return cmd_export(exp);
    if (*grid_cmd) return cmd_grid_info(grid);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
