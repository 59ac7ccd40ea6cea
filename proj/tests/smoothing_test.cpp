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

#include <gtest/gtest.h>

#include "optiwb/io.hpp"
#include "optiwb/kinematics.hpp"
#include "optiwb/objective.hpp"
#include "optiwb/smoothing.hpp"

namespace optiwb {
namespace {

// The first stretch of the demo task, where the tool moves slowly.
struct Fixture {
  Problem problem;
  DPSolution dp;
  SmoothingResult result;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture out;
    out.problem = load_problem(std::filesystem::path(OPTIWB_DATA_DIR) / "demo_scene.json");
    out.problem.task.waypoints.resize(22);
    out.problem.scene.forbidden_areas.clear();
    out.dp = dp_solve(out.problem.model, out.problem.scene, out.problem.task, out.problem.config);
    out.result = smooth_optimize(out.problem.model, out.problem.scene, out.problem.task, out.dp, out.problem.config);
    return out;
  }();
  return f;
}

TEST(Smoothing, SeedFollowsTheDiscreteSolution) {
  const Fixture& f = fixture();
  std::vector<BasePose> knots;
  std::vector<VecX> arms;
  for (const JointConfig& q : f.dp.trajectory.configs) {
    knots.push_back(q.base);
    arms.push_back(q.arm);
  }
  const JointTrajectory seed = interpolate_seed(f.problem.model, f.problem.task, knots, f.problem.config, &arms);
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const TrajectorySample s = eval_trajectory(seed, f.dp.trajectory.times[i]);
    EXPECT_LT((s.q.arm - arms[i]).cwiseAbs().maxCoeff(), 1e-6) << i;
    EXPECT_NEAR(s.q.base.x, knots[i].x, 1e-12);
  }
  const TrajectorySample start = eval_trajectory(seed, 0.0);
  EXPECT_LT(start.q_dot.arm.norm(), 1e-12);
}

TEST(Smoothing, ResultIsFeasibleAndNoWorseThanTheSeed) {
  const Fixture& f = fixture();
  const auto& r = f.result;
  EXPECT_LE(r.cost.total, r.seed_cost.total + 1e-9);
  EXPECT_TRUE(r.stats.converged);
  const int m = f.problem.config.smoothing.samples_per_interval;
  const ConstraintReport report = check_trajectory(f.problem.model, f.problem.scene, r.trajectory, 2 * m,
                                                   f.problem.config.heading_tolerance());
  EXPECT_TRUE(report.feasible()) << report.violations.size() << " violations";
  const CostBreakdown again =
      trajectory_cost(f.problem.model, f.problem.scene, r.trajectory, f.problem.config.sigma, m);
  EXPECT_NEAR(again.total, r.cost.total, 1e-12);
}

TEST(Smoothing, TaskIsExactAtWaypoints) {
  const Fixture& f = fixture();
  for (const Waypoint& w : f.problem.task.waypoints) {
    const TrajectorySample s = eval_trajectory(f.result.trajectory, w.t);
    const auto [pe, oe] = pose_residual(f.problem.model, s.q, w.pose());
    EXPECT_LT(pe, 1e-6) << w.t;
    EXPECT_LT(oe, 1e-6) << w.t;
    for (const FixedJoint& fj : w.fixed_joints) EXPECT_NEAR(s.q.arm[fj.arm_joint_index], fj.value, 1e-9);
  }
  EXPECT_GE(f.result.stats.max_task_deviation, 0.0);
}

TEST(Smoothing, KnotsMatchTheBaseProfile) {
  const Fixture& f = fixture();
  const auto& spline = std::get<SplineTrajectory>(f.result.trajectory.representation);
  ASSERT_EQ(f.result.knots.size(), f.problem.task.waypoints.size());
  for (std::size_t i = 0; i < f.result.knots.size(); ++i) EXPECT_EQ(spline.base.knots()[i], f.result.knots[i]);
}

TEST(Smoothing, PureRollingHoldsWhileTranslating) {
  const Fixture& f = fixture();
  const auto& spline = std::get<SplineTrajectory>(f.result.trajectory.representation);
  int translating = 0;
  for (double t : sample_times(spline.base.times(), 40)) {
    const TrajectorySample s = eval_trajectory(spline, t);
    if (!s.translating) continue;
    ++translating;
    const double h = s.q.base.h;
    const double speed = std::hypot(s.q_dot.base[0], s.q_dot.base[1]);
    if (speed == 0.0) continue;
    EXPECT_LT(std::abs(std::cos(h) * s.q_dot.base[1] - std::sin(h) * s.q_dot.base[0]) / speed, 1e-6);
  }
  EXPECT_GT(translating, 0);
}

}  // namespace
}  // namespace optiwb
