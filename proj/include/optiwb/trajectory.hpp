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

#include <vector>

#include "optiwb/model.hpp"

namespace optiwb {

struct TrajectorySample {
  JointConfig q;
  JointRates q_dot;
  JointRates q_ddot;
  /// Base is in a translation phase (heading must match travel direction).
  bool translating = false;
};

/// Arm from the spline basis, base from the phase model. Base rates are
/// one-sided (right) at phase boundaries; base accelerations are zero.
TrajectorySample eval_trajectory(const SplineTrajectory& traj, double t);
TrajectorySample eval_trajectory(const JointTrajectory& traj, double t);

/// t_i + (t_{i+1} - t_i) k / M for k = 0..M-1 over every interval, then t_N.
std::vector<double> sample_times(const std::vector<double>& knots, int per_interval);

}  // namespace optiwb
