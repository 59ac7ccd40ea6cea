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

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "optiwb/ddp.hpp"
#include "optiwb/model.hpp"
#include "optiwb/smoothing.hpp"

namespace optiwb {

inline constexpr const char* kSceneFormat = "optiwb-scene/1";
inline constexpr const char* kPlanFormat = "optiwb-plan/1";

struct Problem {
  RobotModel model;
  Scene scene;
  TaskTrajectory task;
  PlannerConfig config;
};

/// Malformed or invalid document. Every entry starts with the document path
/// of the offending value, e.g. "scene.sun.elevation: ...".
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

/// Unreadable or unwritable file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses and validates a scene document.
Problem parse_problem(const std::string& text);
Problem load_problem(const std::filesystem::path& path);
/// Canonical form: sorted keys, every config value explicit, full precision.
std::string serialize_problem(const Problem& problem);
void save_problem(const std::filesystem::path& path, const Problem& problem);

struct Plan {
  std::string problem_format = kSceneFormat;
  std::optional<DiscreteTrajectory> discrete;
  std::optional<CostBreakdown> discrete_cost;
  std::optional<SplineTrajectory> spline;
  std::optional<CostBreakdown> seed_cost;
  /// Cost of the final trajectory (the spline when present).
  CostBreakdown cost;
  std::map<std::string, double> stats;
  double sample_rate = 10.0;
  std::vector<double> sample_times;
  /// Stacked (x, y, h, arm...) values and rates at sample_times.
  std::vector<VecX> samples;
  std::vector<VecX> sample_rates;

  /// Spline when present, otherwise the discrete trajectory.
  JointTrajectory trajectory() const;
};

/// t0, t0 + 1/rate, ... up to t1 (inclusive within 1e-9).
std::vector<double> export_times(double t0, double t1, double rate);

/// Stacked value and rate of a discrete trajectory by linear interpolation
/// between waypoints (rates are those of the enclosing segment).
std::pair<VecX, VecX> sample_discrete(const DiscreteTrajectory& traj, double t);

Plan make_plan(const DPSolution& dp, double sample_rate);
Plan make_plan(const SmoothingResult& result, double sample_rate, const DPSolution* dp = nullptr);

std::string serialize_plan(const Plan& plan);
Plan parse_plan(const std::string& text);

void save_plan(const std::filesystem::path& path, const Plan& plan);
void save_plan(const std::filesystem::path& path, const DPSolution& dp, double sample_rate);
void save_plan(const std::filesystem::path& path, const SmoothingResult& result, double sample_rate,
               const DPSolution* dp = nullptr);
Plan load_plan(const std::filesystem::path& path);

/// CSV: t, arm joint names, x, y, h, u, v, tv, snv. u and v are empty when
/// the target is behind the camera.
void export_traces(const std::filesystem::path& path, const JointTrajectory& traj, const Scene& scene,
                   const RobotModel& model, double sample_rate, const VecX* snv_weights = nullptr);

}  // namespace optiwb
