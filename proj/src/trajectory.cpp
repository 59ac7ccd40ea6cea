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

#include "optiwb/trajectory.hpp"

#include <stdexcept>

namespace optiwb {

TrajectorySample eval_trajectory(const SplineTrajectory& traj, double t) {
  const double t0 = traj.base.start_time();
  const double t1 = traj.base.end_time();
  constexpr double kSlack = 1e-12;
  if (!(t >= t0 - kSlack && t <= t1 + kSlack))
    throw std::invalid_argument("trajectory time " + std::to_string(t) + " outside [" + std::to_string(t0) + ", " +
                                std::to_string(t1) + "]");
  t = std::clamp(t, t0, t1);
  const BaseState base = traj.base.evaluate(t);
  TrajectorySample s;
  s.q = JointConfig(base.pose, traj.arm.evaluate(t, 0));
  s.q_dot.base << base.vx, base.vy, base.omega;
  s.q_dot.arm = traj.arm.evaluate(t, 1);
  s.q_ddot.base.setZero();
  s.q_ddot.arm = traj.arm.evaluate(t, 2);
  s.translating = base.translating;
  return s;
}

TrajectorySample eval_trajectory(const JointTrajectory& traj, double t) {
  const auto* spline = std::get_if<SplineTrajectory>(&traj.representation);
  if (spline == nullptr) throw std::invalid_argument("eval_trajectory needs a spline-backed trajectory");
  return eval_trajectory(*spline, t);
}

std::vector<double> sample_times(const std::vector<double>& knots, int per_interval) {
  if (per_interval < 1) throw std::invalid_argument("samples per interval must be >= 1");
  std::vector<double> out;
  if (knots.empty()) return out;
  out.reserve((knots.size() - 1) * per_interval + 1);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const double span = knots[i + 1] - knots[i];
    for (int k = 0; k < per_interval; ++k) out.push_back(knots[i] + span * k / per_interval);
  }
  out.push_back(knots.back());
  return out;
}

}  // namespace optiwb
