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

#include <random>

#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "optiwb/constraints.hpp"
#include "optiwb/kinematics.hpp"

namespace optiwb {
namespace {

using testing::rover_arm;

JointConfig at(double x, double y, double h, const VecX& arm) { return JointConfig(BasePose{x, y, h}, arm); }

TEST(Constraints, AccelerationMatchesSecondDifference) {
  RobotModel m = rover_arm();
  for (auto& j : m.arm_joints) {
    j.vel_max = 10.0;
    j.acc_max = 0.5;
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-0.6, 0.6);
  const double dt = 0.8;
  int flagged = 0;
  for (int trial = 0; trial < 200; ++trial) {
    VecX a0(7), a1(7), a2(7);
    for (int k = 0; k < 7; ++k) {
      a0[k] = u(rng);
      a1[k] = a0[k] + 0.5 * u(rng);
      a2[k] = a1[k] + 0.5 * u(rng);
    }
    const JointConfig q0 = at(0, 0, 0, a0), q1 = at(0, 0, 0, a1), q2 = at(0, 0, 0, a2);
    const ConstraintReport r = check_differential(m, q1, q2, &q0, dt);
    std::size_t expected = 0;
    for (int k = 0; k < 7; ++k) {
      const double acc = (a2[k] - 2 * a1[k] + a0[k]) / (dt * dt);
      if (std::abs(acc) > 0.5 + 1e-9) ++expected;
    }
    EXPECT_EQ(r.count(constraint::kJointAcceleration), expected);
    for (const Violation& v : r.violations) {
      const int k = v.detail.back() - '1';
      const double acc = (a2[k] - 2 * a1[k] + a0[k]) / (dt * dt);
      EXPECT_NEAR(v.magnitude, std::abs(acc) - 0.5, 1e-12);
    }
    flagged += static_cast<int>(expected);
  }
  EXPECT_GT(flagged, 50);
}

TEST(Constraints, BaseRateLimits) {
  const RobotModel m = rover_arm();
  const VecX arm = VecX::Zero(7);
  const ConstraintReport fast = check_differential(m, at(0, 0, 0, arm), at(0.3, 0.4, 0, arm), nullptr, 2.0);
  ASSERT_EQ(fast.count(constraint::kBaseSpeed), 1u);
  EXPECT_NEAR(fast.violations[0].magnitude, 0.25 - 0.2, 1e-12);
  // Shortest way round from +3 to -3 is 0.28 rad.
  const ConstraintReport wrap = check_differential(m, at(0, 0, 3.0, arm), at(0, 0, -3.0, arm), nullptr, 1.0);
  EXPECT_TRUE(wrap.feasible());
  const ConstraintReport spin = check_differential(m, at(0, 0, 0, arm), at(0, 0, 1.0, arm), nullptr, 1.0);
  EXPECT_EQ(spin.count(constraint::kBaseTurnRate), 1u);
}

TEST(Constraints, PureRolling) {
  const RobotModel m = rover_arm();
  const VecX arm = VecX::Zero(7);
  const double up = std::numbers::pi / 2;
  EXPECT_TRUE(check_rolling(at(0, 0, up, arm), at(0, 0.5, up, arm), 10.0, m, 0.1).feasible());
  EXPECT_TRUE(check_rolling(at(0, 0, 0, arm), at(0, 0, 2.0, arm), 10.0, m, 0.1).feasible());
  const ConstraintReport skew = check_rolling(at(0, 0, 0, arm), at(0.5, 0, up, arm), 100.0, m, 0.1);
  ASSERT_EQ(skew.count(constraint::kHeadingMisaligned), 1u);
  EXPECT_NEAR(skew.violations[0].magnitude, up - 0.1, 1e-12);
  // Turn 90 degrees, drive 1 m: 3.93 s + 5 s.
  const ConstraintReport late = check_rolling(at(0, 0, 0, arm), at(0, 1, up, arm), 8.0, m, 0.1);
  ASSERT_EQ(late.count(constraint::kTiming), 1u);
  EXPECT_NEAR(late.violations[0].magnitude, up / 0.4 + 5.0 - 8.0, 1e-12);
}

TEST(Constraints, JointLimits) {
  const RobotModel m = rover_arm();
  VecX arm = VecX::Zero(7);
  arm[1] = m.arm_joints[1].pos_max + 0.25;
  const ConstraintReport r = check_joint_limits(m, arm);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_NEAR(r.violations[0].magnitude, 0.25, 1e-12);
  EXPECT_EQ(r.violations[0].detail, "a2");
}

TEST(Constraints, ForbiddenAreaUsesBaseCenter) {
  const RobotModel m = rover_arm();
  Scene scene;
  scene.forbidden_areas = {Polygon{{{1, -1}, {2, -1}, {2, 1}, {1, 1}}}};
  EXPECT_TRUE(check_base_placement(m, scene, BasePose{1.2, 0, 0}, false).contains(constraint::kForbiddenArea));
  EXPECT_FALSE(check_base_placement(m, scene, BasePose{0.9, 0, 0}, false).contains(constraint::kForbiddenArea));
  EXPECT_TRUE(check_base_placement(m, scene, BasePose{0.9, 0, 0}, false, 0.2).contains(constraint::kForbiddenArea));
  EXPECT_NEAR(forbidden_signed_distance(Vec2(1.2, 0), scene.forbidden_areas, 1.0), 0.2, 1e-12);
  EXPECT_NEAR(forbidden_signed_distance(Vec2(0.7, 0), scene.forbidden_areas, 1.0), -0.3, 1e-12);
}

TEST(Constraints, ObstacleAgainstChassis) {
  const RobotModel m = rover_arm();
  Scene scene;
  scene.obstacles = {Box{Vec3(0.1, 0.1, 0.1), Transform3d::FromTranslation(Vec3(0.55, 0, 0.3))}};
  const ConstraintReport r = check_base_placement(m, scene, BasePose{}, false);
  EXPECT_EQ(r.count(constraint::kCollision), 1u);
  EXPECT_TRUE(check_base_placement(m, scene, BasePose{-0.2, 0, 0}, false).feasible());
}

TEST(Constraints, ShadowOnlyAtFinalWaypoint) {
  const RobotModel m = rover_arm();
  Scene scene;
  scene.sun = {0.0, std::numbers::pi / 2};
  scene.target_position = Vec3(0.1, 0.0, 0.0);
  const JointConfig q = at(0, 0, 0, VecX::Zero(7));
  EXPECT_TRUE(check_positional(m, scene, q, true).contains(constraint::kOvershadow));
  EXPECT_FALSE(check_positional(m, scene, q, false).contains(constraint::kOvershadow));
  const JointConfig away = at(2.0, 0, 0, VecX::Zero(7));
  EXPECT_FALSE(check_positional(m, scene, away, true).contains(constraint::kOvershadow));
}

TEST(Constraints, SelfCollisionSkipsAdjacentLinks) {
  const RobotModel m = rover_arm();
  VecX arm = VecX::Zero(7);
  EXPECT_FALSE(check_arm_placement(m, Scene{}, at(0, 0, 0, arm), false).contains(constraint::kSelfCollision));
  // Fold the elbow back onto the upper arm.
  arm[3] = m.arm_joints[3].pos_max;
  arm[5] = m.arm_joints[5].pos_max;
  const ConstraintReport r = check_arm_placement(m, Scene{}, at(0, 0, 0, arm), false);
  for (const Violation& v : r.violations) EXPECT_EQ(v.constraint_id, constraint::kSelfCollision);
}

TEST(Constraints, InBCombinesChecks) {
  const RobotModel m = rover_arm();
  Scene scene;
  scene.target_position = Vec3(5, 0, 0);
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int k = 0; k < 200; ++k) {
    const JointConfig a = at(u(rng), u(rng), 3 * u(rng), testing::random_arm(m, rng));
    const JointConfig b = at(a.base.x + u(rng), a.base.y + u(rng), a.base.h + u(rng), a.arm + VecX::Ones(7) * u(rng));
    const JointConfig c = at(b.base.x + u(rng), b.base.y + u(rng), b.base.h + u(rng), b.arm + VecX::Ones(7) * u(rng));
    const bool expected = check_positional(m, scene, c, false).feasible() &&
                          check_differential(m, b, c, &a, 2.0).feasible() &&
                          check_rolling(b, c, 2.0, m, 0.1).feasible();
    EXPECT_EQ(in_B(m, scene, c, &b, &a, 2.0, false, 0.1), expected);
  }
}

TEST(Constraints, SplineVelocityViolationIsLocated) {
  RobotModel m = rover_arm();
  m.arm_joints[0].vel_max = 0.1;
  const std::vector<double> sites = {0.0, 1.0, 2.0, 3.0};
  MatX values = MatX::Zero(7, 4);
  values(0, 2) = 0.5;
  const SplineTrajectory traj{BaseProfile::build(sites, std::vector<BasePose>(4), m.base_limits),
                              CubicInterpolator<double>(sites).interpolate(values)};
  const ConstraintReport r = check_trajectory(m, Scene{}, JointTrajectory{traj, std::nullopt}, 10, 0.1);
  ASSERT_TRUE(r.contains(constraint::kJointVelocity));
  for (const Violation& v : r.violations) {
    if (v.constraint_id != constraint::kJointVelocity) continue;
    EXPECT_GE(v.time, 0.0);
    EXPECT_LE(v.time, 3.0);
    EXPECT_GT(v.magnitude, 0.0);
    const double rate = std::abs(traj.arm.evaluate(v.time, 1)[0]);
    EXPECT_NEAR(v.magnitude, rate - 0.1, 1e-12);
  }
}

TEST(Constraints, ReportBookkeeping) {
  ConstraintReport a;
  a.add(constraint::kTiming, 0.5);
  ConstraintReport b;
  b.append(a, 3, 1.5);
  b.add(constraint::kTiming, 2.0);
  EXPECT_EQ(b.violations[0].waypoint, 3);
  EXPECT_EQ(b.violations[0].time, 1.5);
  EXPECT_EQ(b.count(constraint::kTiming), 2u);
  EXPECT_EQ(b.max_magnitude(), 2.0);
  EXPECT_EQ(b.squared_magnitude(), 4.25);
}

}  // namespace
}  // namespace optiwb
