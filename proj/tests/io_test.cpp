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

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "dp_instances.hpp"
#include "optiwb/io.hpp"
#include "optiwb/kinematics.hpp"
#include "optiwb/objective.hpp"

namespace optiwb {
namespace {

using nlohmann::json;

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "optiwb_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

const std::string& demo_text() {
  static const std::string text = read_text(std::filesystem::path(OPTIWB_DATA_DIR) / "demo_scene.json");
  return text;
}

std::vector<std::string> errors_of(const std::string& text) {
  try {
    parse_problem(text);
  } catch (const ParseError& e) {
    return e.errors();
  }
  return {};
}

bool any_starts_with(const std::vector<std::string>& errors, const std::string& prefix) {
  for (const std::string& e : errors)
    if (e.rfind(prefix, 0) == 0) return true;
  return false;
}

TEST(Io, DemoSceneParses) {
  const Problem p = parse_problem(demo_text());
  EXPECT_EQ(p.task.waypoints.size(), 40u);
  EXPECT_DOUBLE_EQ(p.task.duration(), 39.0);
  EXPECT_DOUBLE_EQ(p.config.sigma, 0.95);
  EXPECT_DOUBLE_EQ(p.config.grid.dx, 0.1);
  EXPECT_DOUBLE_EQ(p.config.grid.dh, 0.2);
  EXPECT_EQ(p.model.arm_dof(), 7);
  EXPECT_EQ(p.scene.forbidden_areas.size(), 1u);
}

TEST(Io, SerializeParseIsAFixedPoint) {
  const Problem p = parse_problem(demo_text());
  const std::string once = serialize_problem(p);
  const std::string twice = serialize_problem(parse_problem(once));
  EXPECT_EQ(once, twice);
  const Problem q = parse_problem(once);
  EXPECT_EQ(q.model.arm_joints[3].axis, p.model.arm_joints[3].axis);
  EXPECT_EQ(q.scene.target_position, p.scene.target_position);
  EXPECT_EQ(q.task.waypoints[17].position, p.task.waypoints[17].position);
}

TEST(Io, ErrorsNameTheOffendingPath) {
  json doc = json::parse(demo_text());
  doc["scene"]["sun"]["elevation"] = -0.1;
  EXPECT_TRUE(any_starts_with(errors_of(doc.dump()), "scene.sun.elevation"));

  doc = json::parse(demo_text());
  doc["robot"]["arm_joints"][2]["colour"] = "red";
  EXPECT_TRUE(any_starts_with(errors_of(doc.dump()), "robot.arm_joints[2].colour"));

  doc = json::parse(demo_text());
  doc["task"]["waypoints"][3]["t"] = 100.0;
  EXPECT_FALSE(errors_of(doc.dump()).empty());

  doc = json::parse(demo_text());
  doc["config"]["sigma"] = 1.5;
  EXPECT_TRUE(any_starts_with(errors_of(doc.dump()), "config.sigma"));

  doc = json::parse(demo_text());
  doc["format"] = "optiwb-scene/2";
  EXPECT_FALSE(errors_of(doc.dump()).empty());

  EXPECT_THROW(parse_problem("{ not json"), ParseError);
  EXPECT_THROW(load_problem(scratch("missing.json")), IoError);
}

TEST(Io, ExportTimesIncludeTheEnd) {
  const std::vector<double> t = export_times(0.0, 39.0, 10.0);
  ASSERT_EQ(t.size(), 391u);
  EXPECT_DOUBLE_EQ(t.back(), 39.0);
  EXPECT_EQ(export_times(0.0, 1.05, 10.0).size(), 11u);
}

struct Solved {
  testing::SmallInstance instance;
  DPSolution dp;
};

const Solved& solved() {
  static const Solved s = [] {
    std::mt19937_64 rng(2024);
    for (;;) {
      Solved out{testing::random_instance(rng), {}};
      try {
        out.dp = dp_solve(out.instance.model, out.instance.scene, out.instance.task, out.instance.config);
        return out;
      } catch (const std::runtime_error&) {
      }
    }
  }();
  return s;
}

TEST(Io, DiscretePlanRoundTrip) {
  const Solved& s = solved();
  const Plan plan = make_plan(s.dp, 10.0);
  EXPECT_EQ(plan.sample_times.size(), static_cast<std::size_t>(s.instance.task.duration() * 10 + 1));
  const auto path = scratch("discrete_plan.json");
  save_plan(path, plan);
  const Plan back = load_plan(path);
  EXPECT_EQ(serialize_plan(back), serialize_plan(plan));
  ASSERT_TRUE(back.discrete.has_value());
  EXPECT_FALSE(back.spline.has_value());
  const auto& m = s.instance.model;
  const auto& sc = s.instance.scene;
  const CostBreakdown c = trajectory_cost(m, sc, back.trajectory(), s.instance.config.sigma, 10);
  EXPECT_NEAR(c.total, s.dp.cost.total, 1e-9);
  EXPECT_EQ(back.stats.at("dp.nodes_expanded"), static_cast<double>(s.dp.stats.nodes_expanded));
  for (std::size_t i = 0; i < back.discrete->configs.size(); ++i)
    EXPECT_EQ(back.discrete->configs[i].stacked(), s.dp.trajectory.configs[i].stacked());
}

TEST(Io, DiscreteSamplesInterpolateLinearly) {
  DiscreteTrajectory d;
  d.times = {0.0, 2.0};
  d.configs = {JointConfig(BasePose{0, 0, 3.0}, VecX::Zero(1)), JointConfig(BasePose{1, 2, -3.0}, VecX::Ones(1))};
  const auto [q, v] = sample_discrete(d, 0.5);
  EXPECT_NEAR(q[0], 0.25, 1e-15);
  EXPECT_NEAR(q[1], 0.5, 1e-15);
  // Through the short way round the +-pi seam.
  const double step = 2 * std::numbers::pi - 6.0;
  EXPECT_NEAR(angle_difference(q[2], 3.0 + 0.25 * step), 0.0, 1e-12);
  EXPECT_NEAR(v[2], step / 2.0, 1e-12);
  EXPECT_NEAR(v[3], 0.5, 1e-15);
}

TEST(Io, SplinePlanRoundTrip) {
  const Solved& s = solved();
  const auto& m = s.instance.model;
  const std::vector<BasePose> knots = [&] {
    std::vector<BasePose> k;
    for (const JointConfig& q : s.dp.trajectory.configs) k.push_back(q.base);
    return k;
  }();
  std::vector<VecX> arms;
  for (const JointConfig& q : s.dp.trajectory.configs) arms.push_back(q.arm);
  SmoothingResult r;
  r.trajectory = interpolate_seed(m, s.instance.task, knots, s.instance.config, &arms);
  r.knots = knots;
  r.cost = trajectory_cost(m, s.instance.scene, r.trajectory, s.instance.config.sigma, 10);
  r.seed_cost = r.cost;
  const Plan plan = make_plan(r, 10.0, &s.dp);
  const Plan back = parse_plan(serialize_plan(plan));
  EXPECT_EQ(serialize_plan(back), serialize_plan(plan));
  ASSERT_TRUE(back.spline.has_value());
  ASSERT_TRUE(back.discrete.has_value());
  const JointTrajectory a = plan.trajectory(), b = back.trajectory();
  for (double t = 0.0; t <= a.end_time(); t += 0.37) {
    const TrajectorySample x = eval_trajectory(a, t), y = eval_trajectory(b, t);
    EXPECT_EQ(x.q.stacked(), y.q.stacked()) << t;
    EXPECT_EQ(x.q_dot.stacked(), y.q_dot.stacked()) << t;
  }
  const CostBreakdown c = trajectory_cost(m, s.instance.scene, b, s.instance.config.sigma, 10);
  EXPECT_NEAR(c.total, r.cost.total, 1e-9);
  for (std::size_t i = 0; i < back.samples.size(); ++i) {
    const TrajectorySample x = eval_trajectory(b, back.sample_times[i]);
    EXPECT_LT((back.samples[i] - x.q.stacked()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

TEST(Io, TracesCarryVisibilityAndRates) {
  const Solved& s = solved();
  const auto path = scratch("traces.csv");
  const JointTrajectory traj{s.dp.trajectory, std::nullopt};
  export_traces(path, traj, s.instance.scene, s.instance.model, 4.0);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,a1,a2,a3,a4,a5,a6,a7,x,y,h,u,v,tv,snv");
  int rows = 0;
  while (std::getline(in, line)) {
    const std::vector<std::string> cells = split(line);
    ASSERT_EQ(cells.size(), 15u);
    const double t = std::stod(cells[0]);
    const auto [q, v] = sample_discrete(s.dp.trajectory, t);
    const BasePose base{std::stod(cells[8]), std::stod(cells[9]), std::stod(cells[10])};
    EXPECT_NEAR(base.x, q[0], 1e-12);
    EXPECT_NEAR(std::stod(cells[13]), tv_cost(s.instance.model, base, s.instance.scene.target_position), 1e-12);
    EXPECT_NEAR(std::stod(cells[14]), v.squaredNorm(), 1e-9);
    ++rows;
  }
  EXPECT_EQ(rows, static_cast<int>(export_times(0.0, s.instance.task.duration(), 4.0).size()));
}

TEST(Io, PlanFormatIsChecked) {
  const Solved& s = solved();
  json doc = json::parse(serialize_plan(make_plan(s.dp, 10.0)));
  doc["format"] = "optiwb-plan/0";
  EXPECT_THROW(parse_plan(doc.dump()), ParseError);
  doc = json::parse(serialize_plan(make_plan(s.dp, 10.0)));
  doc["surplus"] = 1;
  EXPECT_THROW(parse_plan(doc.dump()), ParseError);
}

}  // namespace
}  // namespace optiwb
