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

#include "optiwb/objective.hpp"

#include <stdexcept>

#include "optiwb/kinematics.hpp"
#include "optiwb/trajectory.hpp"

namespace optiwb {
namespace {

CostBreakdown blend(double tv, double snv, double sigma) { return {sigma * tv + (1.0 - sigma) * snv, tv, snv}; }

}  // namespace

double tv_cost(const RobotModel& model, const BasePose& base, const Vec3& target) {
  const Transform3d cam = camera_pose(model, base);
  const Vec3 to_target = target - cam.translation;
  const double dist = to_target.norm();
  if (!(dist > 1e-9)) throw std::invalid_argument("tv_cost: target coincides with the camera origin");
  const Vec3 boresight = cam.rotate(Vec3::UnitX());
  return std::clamp(1.0 - boresight.dot(to_target) / dist, 0.0, 2.0);
}

double snv_cost(const VecX& q_dot, const VecX* weights) {
  if (weights == nullptr) return q_dot.squaredNorm();
  if (weights->size() != q_dot.size()) throw std::invalid_argument("snv_cost: weight count mismatch");
  return q_dot.cwiseAbs2().dot(*weights);
}

double phi(const RobotModel& model, const Scene& scene, const JointConfig& q, const VecX& q_dot, double sigma,
           const VecX* weights) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw std::invalid_argument("phi: sigma must lie in [0, 1]");
  const double tv = sigma > 0.0 ? tv_cost(model, q.base, scene.target_position) : 0.0;
  const double snv = sigma < 1.0 ? snv_cost(q_dot, weights) : 0.0;
  return sigma * tv + (1.0 - sigma) * snv;
}

double initial_cost(const RobotModel& model, const Scene& scene, const JointConfig& q0, double sigma) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw std::invalid_argument("initial_cost: sigma must lie in [0, 1]");
  return sigma * tv_cost(model, q0.base, scene.target_position);
}

CostBreakdown stage_cost(const RobotModel& model, const Scene& scene, const JointConfig& q_prev, const JointConfig& q,
                         double dt, double sigma, const VecX* weights) {
  VecX rate(3 + q.arm.size());
  rate << q.base.x - q_prev.base.x, q.base.y - q_prev.base.y, angle_difference(q.base.h, q_prev.base.h),
      q.arm - q_prev.arm;
  rate /= dt;
  const double tv = tv_cost(model, q.base, scene.target_position) * dt;
  const double snv = snv_cost(rate, weights) * dt;
  return blend(tv, snv, sigma);
}

VecX simpson_weights(int intervals, double h) {
  if (intervals < 1) throw std::invalid_argument("simpson_weights: need at least one interval");
  VecX w = VecX::Zero(intervals + 1);
  if (intervals == 1) {
    w << 0.5 * h, 0.5 * h;
    return w;
  }
  const int simpson = intervals % 2 == 0 ? intervals : intervals - 3;
  for (int k = 0; k < simpson; k += 2) {
    w[k] += h / 3.0;
    w[k + 1] += 4.0 * h / 3.0;
    w[k + 2] += h / 3.0;
  }
  if (simpson != intervals) {
    const int k = simpson;
    w[k] += 3.0 * h / 8.0;
    w[k + 1] += 9.0 * h / 8.0;
    w[k + 2] += 9.0 * h / 8.0;
    w[k + 3] += 3.0 * h / 8.0;
  }
  return w;
}

CostBreakdown trajectory_cost(const RobotModel& model, const Scene& scene, const JointTrajectory& traj, double sigma,
                              int samples_per_interval, const VecX* weights) {
  if (!(sigma >= 0.0 && sigma <= 1.0)) throw std::invalid_argument("trajectory_cost: sigma must lie in [0, 1]");
  if (const auto* d = std::get_if<DiscreteTrajectory>(&traj.representation)) {
    if (d->configs.empty()) throw std::invalid_argument("trajectory_cost: empty trajectory");
    double tv = tv_cost(model, d->configs.front().base, scene.target_position);
    double snv = 0.0;
    for (std::size_t i = 1; i < d->configs.size(); ++i) {
      const CostBreakdown s =
          stage_cost(model, scene, d->configs[i - 1], d->configs[i], d->times[i] - d->times[i - 1], sigma, weights);
      tv += s.tv;
      snv += s.snv;
    }
    return blend(tv, snv, sigma);
  }

  const auto& spline = std::get<SplineTrajectory>(traj.representation);
  const int m = samples_per_interval;
  const int arm_dof = static_cast<int>(spline.arm.dimension());
  if (weights != nullptr && weights->size() != 3 + arm_dof)
    throw std::invalid_argument("trajectory_cost: weight count mismatch");
  const VecX arm_weights = weights != nullptr ? VecX(weights->tail(arm_dof)) : VecX::Ones(arm_dof);
  const auto& times = spline.base.times();
  double tv = 0.0;
  double snv = 0.0;
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    const double span = times[i + 1] - times[i];
    const VecX w = simpson_weights(m, span / m);
    for (int k = 0; k <= m; ++k) {
      const double t = k == m ? times[i + 1] : times[i] + span * k / m;
      const BasePose base = spline.base.evaluate(t).pose;
      tv += w[k] * tv_cost(model, base, scene.target_position);
      snv += w[k] * spline.arm.evaluate(t, 1).cwiseAbs2().dot(arm_weights);
    }
  }
  if (weights != nullptr)
    snv += spline.base.squared_rate_integral((*weights)[0], (*weights)[1], (*weights)[2]);
  else
    snv += spline.base.squared_rate_integral();
  return blend(tv, snv, sigma);
}

}  // namespace optiwb
