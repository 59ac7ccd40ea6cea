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

#include "optiwb/rigid_transform.hpp"

namespace optiwb {

/// Planar base configuration q_b = (x, y, h).
struct BasePose {
  double x = 0.0;
  double y = 0.0;
  double h = 0.0;

  Vec2 position() const { return {x, y}; }
  bool operator==(const BasePose&) const = default;
};

struct BaseLimits {
  double v_max = 0.0;
  double omega_max = 0.0;
};

/// Base state along a profile. Rates are one-sided at phase boundaries.
struct BaseState {
  BasePose pose;
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;
  bool translating = false;
};

struct BasePhase {
  enum class Kind { kHold, kRotate, kTranslate };
  Kind kind = Kind::kHold;
  int interval = 0;
  double t0 = 0.0;
  double t1 = 0.0;
  BasePose start;
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;

  double duration() const { return t1 - t0; }
};

/// Minimum time needed to rotate to the travel direction, drive straight,
/// and rotate to the final heading at the given limits.
double maneuver_time(const BasePose& from, const BasePose& to, const BaseLimits& limits);

/// Piecewise-linear base path through knot poses. Inside every interval the
/// base turns in place toward the next knot, drives straight with heading
/// equal to the travel direction, then turns in place to the knot heading.
/// Phase durations minimise the squared-rate integral subject to the limits;
/// intervals whose maneuver cannot fit get proportionally compressed phases
/// and a positive timing excess.
class BaseProfile {
 public:
  BaseProfile() = default;

  static BaseProfile build(std::vector<double> times, std::vector<BasePose> knots, const BaseLimits& limits);

  BaseState evaluate(double t) const;

  const std::vector<double>& times() const { return times_; }
  const std::vector<BasePose>& knots() const { return knots_; }
  const std::vector<BasePhase>& phases() const { return phases_; }
  const BaseLimits& limits() const { return limits_; }

  /// Per-interval time the maneuver needs beyond the interval length (0 when it fits).
  const std::vector<double>& timing_excess() const { return timing_excess_; }

  /// Exact integral of wx*vx^2 + wy*vy^2 + wh*omega^2 over the profile.
  double squared_rate_integral(double wx = 1.0, double wy = 1.0, double wh = 1.0) const;

  double start_time() const { return times_.front(); }
  double end_time() const { return times_.back(); }

 private:
  std::vector<double> times_;
  std::vector<BasePose> knots_;
  std::vector<BasePhase> phases_;
  std::vector<double> timing_excess_;
  BaseLimits limits_;
};

}  // namespace optiwb
