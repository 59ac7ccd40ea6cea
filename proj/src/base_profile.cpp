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

#include "optiwb/base_profile.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace optiwb {
namespace {

constexpr double kStationary = 1e-9;

struct Move {
  BasePhase::Kind kind;
  double amount;  // |angle| or distance
  double limit;
};

// Durations minimising sum(amount^2 / duration) with sum(duration) = span and
// duration >= amount / limit. Phases share a common rate until they hit their
// own limit. Returns the excess time when even saturated rates do not fit.
double allocate(const std::vector<Move>& moves, double span, std::vector<double>& durations) {
  const std::size_t n = moves.size();
  durations.assign(n, 0.0);
  double min_time = 0.0;
  for (const Move& m : moves) min_time += m.amount / m.limit;
  if (min_time > span) {
    for (std::size_t k = 0; k < n; ++k) durations[k] = moves[k].amount / moves[k].limit * span / min_time;
    return min_time - span;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return moves[a].limit < moves[b].limit; });
  // Saturate the lowest-limit phases one by one until the shared rate fits.
  for (std::size_t saturated = 0; saturated <= n; ++saturated) {
    double fixed_time = 0.0;
    double free_amount = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const Move& m = moves[order[k]];
      if (k < saturated)
        fixed_time += m.amount / m.limit;
      else
        free_amount += m.amount;
    }
    const double remaining = span - fixed_time;
    if (free_amount <= 0.0) {
      // Everything saturated and fits: stretch proportionally.
      for (std::size_t k = 0; k < n; ++k) durations[k] = moves[k].amount / moves[k].limit * span / min_time;
      return 0.0;
    }
    const double rate = free_amount / remaining;
    bool fits = true;
    for (std::size_t k = saturated; k < n; ++k)
      if (rate > moves[order[k]].limit * (1.0 + 1e-12)) fits = false;
    if (!fits) continue;
    for (std::size_t k = 0; k < n; ++k) {
      const Move& m = moves[order[k]];
      durations[order[k]] = k < saturated ? m.amount / m.limit : m.amount / rate;
    }
    return 0.0;
  }
  return 0.0;
}

}  // namespace

double maneuver_time(const BasePose& from, const BasePose& to, const BaseLimits& limits) {
  const double dx = to.x - from.x;
  const double dy = to.y - from.y;
  const double dist = std::hypot(dx, dy);
  if (dist <= kStationary) return std::abs(angle_difference(to.h, from.h)) / limits.omega_max;
  const double theta = std::atan2(dy, dx);
  const double turn = std::abs(angle_difference(theta, from.h)) + std::abs(angle_difference(to.h, theta));
  return turn / limits.omega_max + dist / limits.v_max;
}

BaseProfile BaseProfile::build(std::vector<double> times, std::vector<BasePose> knots, const BaseLimits& limits) {
  if (times.size() != knots.size() || times.empty())
    throw std::invalid_argument("base profile needs one knot per time");
  if (!(limits.v_max > 0.0) || !(limits.omega_max > 0.0))
    throw std::invalid_argument("base limits must be positive");
  BaseProfile profile;
  profile.times_ = std::move(times);
  profile.knots_ = std::move(knots);
  profile.limits_ = limits;
  for (BasePose& k : profile.knots_) k.h = normalize_angle(k.h);

  std::vector<double> durations;
  for (std::size_t i = 0; i + 1 < profile.knots_.size(); ++i) {
    const double t0 = profile.times_[i];
    const double t1 = profile.times_[i + 1];
    if (!(t1 > t0)) throw std::invalid_argument("base profile times must increase");
    const BasePose& a = profile.knots_[i];
    const BasePose& b = profile.knots_[i + 1];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double dist = std::hypot(dx, dy);

    struct Step {
      Move move;
      double signed_turn = 0.0;
    };
    std::vector<Step> steps;
    if (dist <= kStationary) {
      const double turn = angle_difference(b.h, a.h);
      if (turn != 0.0) steps.push_back({{BasePhase::Kind::kRotate, std::abs(turn), limits.omega_max}, turn});
    } else {
      const double theta = std::atan2(dy, dx);
      const double turn1 = angle_difference(theta, a.h);
      const double turn2 = angle_difference(b.h, theta);
      if (turn1 != 0.0) steps.push_back({{BasePhase::Kind::kRotate, std::abs(turn1), limits.omega_max}, turn1});
      steps.push_back({{BasePhase::Kind::kTranslate, dist, limits.v_max}, 0.0});
      if (turn2 != 0.0) steps.push_back({{BasePhase::Kind::kRotate, std::abs(turn2), limits.omega_max}, turn2});
    }

    if (steps.empty()) {
      BasePhase hold;
      hold.kind = BasePhase::Kind::kHold;
      hold.interval = static_cast<int>(i);
      hold.t0 = t0;
      hold.t1 = t1;
      hold.start = a;
      profile.phases_.push_back(hold);
      profile.timing_excess_.push_back(0.0);
      continue;
    }

    std::vector<Move> moves;
    for (const Step& s : steps) moves.push_back(s.move);
    profile.timing_excess_.push_back(allocate(moves, t1 - t0, durations));

    BasePose cursor = a;
    double clock = t0;
    for (std::size_t k = 0; k < steps.size(); ++k) {
      BasePhase phase;
      phase.kind = steps[k].move.kind;
      phase.interval = static_cast<int>(i);
      phase.t0 = clock;
      phase.t1 = k + 1 == steps.size() ? t1 : clock + durations[k];
      phase.start = cursor;
      const double span = durations[k];
      if (phase.kind == BasePhase::Kind::kRotate) {
        phase.omega = steps[k].signed_turn / span;
        cursor.h = normalize_angle(cursor.h + steps[k].signed_turn);
      } else {
        phase.vx = dx / span;
        phase.vy = dy / span;
        cursor.x = b.x;
        cursor.y = b.y;
        cursor.h = std::atan2(dy, dx);
      }
      clock = phase.t1;
      profile.phases_.push_back(phase);
    }
  }
  return profile;
}

BaseState BaseProfile::evaluate(double t) const {
  BaseState state;
  if (phases_.empty()) {
    state.pose = knots_.front();
    return state;
  }
  // Right-continuous lookup; the final instant belongs to the last phase.
  auto it = std::upper_bound(phases_.begin(), phases_.end(), t,
                             [](double value, const BasePhase& p) { return value < p.t0; });
  const BasePhase& phase = it == phases_.begin() ? phases_.front() : *std::prev(it);
  const double tau = std::clamp(t - phase.t0, 0.0, phase.duration());
  state.pose = phase.start;
  switch (phase.kind) {
    case BasePhase::Kind::kHold:
      break;
    case BasePhase::Kind::kRotate:
      state.pose.h = normalize_angle(phase.start.h + phase.omega * tau);
      state.omega = phase.omega;
      break;
    case BasePhase::Kind::kTranslate:
      state.pose.x = phase.start.x + phase.vx * tau;
      state.pose.y = phase.start.y + phase.vy * tau;
      state.pose.h = std::atan2(phase.vy, phase.vx);
      state.vx = phase.vx;
      state.vy = phase.vy;
      state.translating = true;
      break;
  }
  // Land exactly on knots at knot times.
  if (t >= phase.t1 && &phase == &phases_.back()) state.pose = knots_.back();
  return state;
}

double BaseProfile::squared_rate_integral(double wx, double wy, double wh) const {
  double total = 0.0;
  for (const BasePhase& p : phases_)
    total += (wx * p.vx * p.vx + wy * p.vy * p.vy + wh * p.omega * p.omega) * p.duration();
  return total;
}

}  // namespace optiwb
