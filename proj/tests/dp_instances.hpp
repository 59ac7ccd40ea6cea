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

// Small randomized planning problems and an exhaustive path search over the
// same node/edge graph the dynamic program works on.

#include <functional>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "optiwb/constraints.hpp"
#include "optiwb/ddp.hpp"
#include "optiwb/kinematics.hpp"
#include "optiwb/objective.hpp"

namespace optiwb::testing {

struct SmallInstance {
  RobotModel model;
  Scene scene;
  TaskTrajectory task;
  PlannerConfig config;
};

// Waypoints are generated from base poses on the grid, so every stage has at
// least one reachable node. Acceleration limits are loose: the exhaustive
// search below enumerates the first-order edge graph.
inline SmallInstance random_instance(std::mt19937_64& rng) {
  SmallInstance s;
  s.model = rover_arm();
  for (ArmJoint& j : s.model.arm_joints) j.acc_max = 1e3;
  std::uniform_int_distribution<int> cells(-5, 5);
  std::uniform_int_distribution<int> count(2, 3);
  std::uniform_int_distribution<int> pick(0, 2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int nx = count(rng), ny = count(rng), nh = count(rng);
  const int waypoints = 3 + pick(rng) % 2;
  const double x0 = 0.1 * cells(rng), y0 = 0.1 * cells(rng), h0 = 0.2 * (cells(rng) % 3);
  s.config.grid.dx = 0.1;
  s.config.grid.dy = 0.1;
  s.config.grid.dh = 0.2;
  s.config.grid.x_range = Interval{x0 - 0.01, x0 + 0.1 * (nx - 1) + 0.01};
  s.config.grid.y_range = Interval{y0 - 0.01, y0 + 0.1 * (ny - 1) + 0.01};
  s.config.grid.h_range = Interval{h0 - 0.01, h0 + 0.2 * (nh - 1) + 0.01};
  s.config.ik.max_branches = 2;
  s.config.sigma = 0.5 + 0.5 * std::abs(u(rng));
  s.scene.target_position = Vec3(3.0 * u(rng), 3.0 * u(rng), 0.0);
  s.scene.sun = {u(rng), 1.0};
  VecX arm = random_arm(s.model, rng, 0.4);
  arm[2] = 0.0;
  for (int i = 0; i < waypoints; ++i) {
    const BasePose b{x0 + 0.1 * std::min(pick(rng), nx - 1), y0 + 0.1 * std::min(pick(rng), ny - 1),
                     h0 + 0.2 * std::min(pick(rng), nh - 1)};
    for (int k = 0; k < 7; ++k)
      if (k != 2) arm[k] += 0.15 * u(rng);
    const Transform3d pose = forward_kinematics(s.model, JointConfig(b, arm));
    Waypoint w;
    w.t = 2.0 * i;
    w.position = pose.translation;
    w.orientation = pose.rotation;
    w.fixed_joints = {{2, 0.0}};
    s.task.waypoints.push_back(w);
  }
  return s;
}

// Two base cells 0.8 m apart that can both reach a stationary tool pose
// between them; the sun is at the zenith. The target starts far away.
inline SmallInstance shadow_instance() {
  SmallInstance s;
  s.model = rover_arm();
  s.config.grid.dx = 0.8;
  s.config.grid.dy = 0.1;
  s.config.grid.dh = std::numbers::pi / 2;
  s.config.grid.x_range = Interval{-0.01, 0.81};
  s.config.grid.y_range = Interval{-0.01, 0.01};
  s.scene.sun = {0.0, std::numbers::pi / 2};
  s.scene.target_position = Vec3(-3.0, 0.0, 0.0);
  for (int i = 0; i < 3; ++i) {
    Waypoint w;
    w.t = 10.0 * i;
    w.position = Vec3(0.4, 0.0, 0.9);
    w.orientation = Quat(0.0, 1.0, 0.0, 0.0);
    w.fixed_joints = {{2, 0.0}};
    s.task.waypoints.push_back(w);
  }
  return s;
}

struct Enumeration {
  double best = std::numeric_limits<double>::infinity();
  std::size_t paths = 0;
};

// Minimum of l(q0) + sum of stage costs over every path whose consecutive
// nodes pass in_B.
inline Enumeration enumerate_paths(const SmallInstance& s, const std::vector<std::vector<DPNode>>& stages) {
  Enumeration out;
  const std::size_t n = stages.size();
  const double tol = s.config.heading_tolerance();
  std::vector<std::vector<std::vector<int>>> next(n);
  std::vector<std::vector<std::vector<double>>> cost(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dt = s.task.waypoints[i + 1].t - s.task.waypoints[i].t;
    next[i].resize(stages[i].size());
    cost[i].resize(stages[i].size());
    for (std::size_t a = 0; a < stages[i].size(); ++a)
      for (std::size_t b = 0; b < stages[i + 1].size(); ++b) {
        const JointConfig& qa = stages[i][a].config;
        const JointConfig& qb = stages[i + 1][b].config;
        if (!in_B(s.model, s.scene, qb, &qa, nullptr, dt, i + 2 == n, tol)) continue;
        next[i][a].push_back(static_cast<int>(b));
        cost[i][a].push_back(stage_cost(s.model, s.scene, qa, qb, dt, s.config.sigma).total);
      }
  }
  std::function<void(std::size_t, int, double)> walk = [&](std::size_t i, int node, double acc) {
    if (i + 1 == n) {
      ++out.paths;
      out.best = std::min(out.best, acc);
      return;
    }
    for (std::size_t e = 0; e < next[i][node].size(); ++e) walk(i + 1, next[i][node][e], acc + cost[i][node][e]);
  };
  for (std::size_t a = 0; a < stages[0].size(); ++a)
    walk(0, static_cast<int>(a), initial_cost(s.model, s.scene, stages[0][a].config, s.config.sigma));
  return out;
}

inline std::vector<std::vector<DPNode>> all_stages(const SmallInstance& s) {
  const RedundancyGrid grid = RedundancyGrid::from_config(s.config.grid, s.task, s.model);
  std::vector<std::vector<DPNode>> stages;
  for (int i = 0; i <= s.task.last_index(); ++i)
    stages.push_back(build_stage(s.model, s.scene, s.task, grid, i, s.config.ik));
  return stages;
}

}  // namespace optiwb::testing
