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

#include "optiwb/constraints.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "optiwb/base_profile.hpp"
#include "optiwb/kinematics.hpp"
#include "optiwb/trajectory.hpp"

namespace optiwb {
namespace {

constexpr double kSlack = 1e-9;
constexpr double kRollingResidual = 1e-6;

struct Posed {
  ConvexVolume volume;
  Vec3 center;
  double radius;
  int frame;
  const std::string* name;
};

Posed pose_volume(const ConvexVolume& local, const Transform3d& frame, int index, const std::string* name) {
  Posed p{transformed(local, frame), Vec3::Zero(), 0.0, index, name};
  p.center = centroid(p.volume);
  p.radius = bounding_radius(p.volume);
  return p;
}

// Clearance with a bounding-sphere shortcut: returns +inf when the spheres
// already clear `margin`.
double culled_clearance(const Posed& a, const Posed& b, double margin) {
  if ((a.center - b.center).norm() - a.radius - b.radius > margin) return std::numeric_limits<double>::infinity();
  return clearance(a.volume, b.volume);
}

struct ObstacleSet {
  std::vector<Posed> items;
  static ObstacleSet of(const Scene& scene) {
    ObstacleSet set;
    for (std::size_t i = 0; i < scene.obstacles.size(); ++i)
      set.items.push_back(pose_volume(scene.obstacles[i], Transform3d::Identity(), -1, nullptr));
    return set;
  }
};

void check_obstacles(const Posed& link, const ObstacleSet& obstacles, double margin, ConstraintReport& out) {
  for (std::size_t k = 0; k < obstacles.items.size(); ++k) {
    const double c = culled_clearance(link, obstacles.items[k], margin);
    if (c < margin || (margin == 0.0 && c <= 0.0))
      out.add(constraint::kCollision, std::max(margin - c, 0.0), *link.name + " vs obstacle " + std::to_string(k));
  }
}

void check_shadow(const Posed& link, const Ray& ray, double margin, ConstraintReport& out) {
  const Vec3 rel = link.center - ray.origin;
  const double along = rel.dot(ray.direction);
  const double lateral = along >= 0.0 ? (rel - along * ray.direction).norm() : rel.norm();
  if (lateral > link.radius + margin + kSlack) return;
  if (margin > 0.0) {
    const double d = ray_distance(ray, link.volume);
    if (d < margin) out.add(constraint::kOvershadow, margin - d, *link.name);
  } else if (ray_intersects_volume(ray, link.volume)) {
    out.add(constraint::kOvershadow, std::max(link.radius - lateral, 0.0), *link.name);
  }
}

double grid_signed_distance(const Vec2& p, const OccupancyGrid& grid, double reach) {
  if (point_in_grid(p, grid)) return forbidden_depth(p, {grid});
  const int window = static_cast<int>(std::ceil(reach / grid.resolution)) + 1;
  const Vec2 local = (p - grid.origin) / grid.resolution;
  const int ix = static_cast<int>(std::floor(local.x()));
  const int iy = static_cast<int>(std::floor(local.y()));
  double d = std::numeric_limits<double>::infinity();
  for (int dy = -window; dy <= window; ++dy)
    for (int dx = -window; dx <= window; ++dx) {
      if (!grid.occupied(ix + dx, iy + dy)) continue;
      const Vec2 lo = grid.origin + grid.resolution * Vec2(ix + dx, iy + dy);
      const Vec2 hi = lo + Vec2::Constant(grid.resolution);
      d = std::min(d, (p - p.cwiseMax(lo).cwiseMin(hi)).norm());
    }
  return -d;
}

}  // namespace

bool ConstraintReport::contains(std::string_view id) const { return count(id) > 0; }

std::size_t ConstraintReport::count(std::string_view id) const {
  return static_cast<std::size_t>(
      std::count_if(violations.begin(), violations.end(), [&](const Violation& v) { return v.constraint_id == id; }));
}

double ConstraintReport::max_magnitude() const {
  double m = 0.0;
  for (const Violation& v : violations) m = std::max(m, v.magnitude);
  return m;
}

double ConstraintReport::squared_magnitude() const {
  double s = 0.0;
  for (const Violation& v : violations) s += v.magnitude * v.magnitude;
  return s;
}

void ConstraintReport::add(std::string_view id, double magnitude, std::string detail) {
  violations.push_back({std::string(id), -1, std::numeric_limits<double>::quiet_NaN(), magnitude, std::move(detail)});
}

void ConstraintReport::append(const ConstraintReport& other, int waypoint, double time) {
  for (Violation v : other.violations) {
    if (v.waypoint < 0) v.waypoint = waypoint;
    if (std::isnan(v.time)) v.time = time;
    violations.push_back(std::move(v));
  }
}

double forbidden_signed_distance(const Vec2& p, const std::vector<ForbiddenArea>& areas, double reach) {
  double best = -std::numeric_limits<double>::infinity();
  for (const ForbiddenArea& area : areas) {
    double d;
    if (const auto* poly = std::get_if<Polygon>(&area)) {
      double edge = std::numeric_limits<double>::infinity();
      const auto& v = poly->vertices;
      for (std::size_t i = 0; i < v.size(); ++i)
        edge = std::min(edge, point_segment_distance_2d(p, v[i], v[(i + 1) % v.size()]));
      d = point_in_polygon(p, *poly) ? edge : -edge;
    } else {
      d = grid_signed_distance(p, std::get<OccupancyGrid>(area), reach);
    }
    best = std::max(best, d);
  }
  return best;
}

std::vector<ConvexVolume> posed_link_volumes(const RobotModel& model, const JointConfig& q) {
  const ChainPoses poses = chain_poses(model, q);
  std::vector<ConvexVolume> out;
  out.reserve(model.link_volumes.size());
  for (const LinkVolume& lv : model.link_volumes) out.push_back(transformed(lv.volume, poses.frames[lv.frame]));
  return out;
}

ConstraintReport check_joint_limits(const RobotModel& model, const VecX& arm) {
  ConstraintReport out;
  for (int k = 0; k < model.arm_dof(); ++k) {
    const ArmJoint& j = model.arm_joints[k];
    const double excess = std::max(j.pos_min - arm[k], arm[k] - j.pos_max);
    if (excess > 0.0) out.add(constraint::kJointPosition, excess, j.name);
  }
  return out;
}

ConstraintReport check_base_placement(const RobotModel& model, const Scene& scene, const BasePose& base,
                                      bool is_final, double margin) {
  ConstraintReport out;
  if (!scene.forbidden_areas.empty()) {
    if (margin > 0.0) {
      const double d = forbidden_signed_distance(base.position(), scene.forbidden_areas, margin);
      if (d > -margin) out.add(constraint::kForbiddenArea, d + margin);
    } else if (point_in_forbidden(base.position(), scene.forbidden_areas)) {
      out.add(constraint::kForbiddenArea, forbidden_depth(base.position(), scene.forbidden_areas));
    }
  }
  const Transform3d frame = base_transform(base);
  const ObstacleSet obstacles = ObstacleSet::of(scene);
  const Ray ray = sun_ray(scene);
  for (const LinkVolume& lv : model.link_volumes) {
    if (lv.frame != 0) continue;
    const Posed p = pose_volume(lv.volume, frame, 0, &lv.name);
    check_obstacles(p, obstacles, margin, out);
    if (is_final) check_shadow(p, ray, margin, out);
  }
  return out;
}

ConstraintReport check_arm_placement(const RobotModel& model, const Scene& scene, const JointConfig& q,
                                     bool is_final, double margin) {
  ConstraintReport out;
  const ChainPoses poses = chain_poses(model, q);
  std::vector<Posed> links;
  links.reserve(model.link_volumes.size());
  for (const LinkVolume& lv : model.link_volumes)
    links.push_back(pose_volume(lv.volume, poses.frames[lv.frame], lv.frame, &lv.name));
  const ObstacleSet obstacles = ObstacleSet::of(scene);
  const Ray ray = sun_ray(scene);
  for (const Posed& link : links) {
    if (link.frame == 0) continue;
    check_obstacles(link, obstacles, margin, out);
    if (is_final) check_shadow(link, ray, margin, out);
  }
  for (std::size_t a = 0; a < links.size(); ++a)
    for (std::size_t b = a + 1; b < links.size(); ++b) {
      if (std::abs(links[a].frame - links[b].frame) <= 1) continue;
      const double c = culled_clearance(links[a], links[b], margin);
      if (c < margin || (margin == 0.0 && c <= 0.0))
        out.add(constraint::kSelfCollision, std::max(margin - c, 0.0), *links[a].name + " vs " + *links[b].name);
    }
  return out;
}

ConstraintReport check_positional(const RobotModel& model, const Scene& scene, const JointConfig& q, bool is_final,
                                  double margin) {
  ConstraintReport out = check_joint_limits(model, q.arm);
  out.append(check_base_placement(model, scene, q.base, is_final, margin));
  out.append(check_arm_placement(model, scene, q, is_final, margin));
  return out;
}

ConstraintReport check_differential(const RobotModel& model, const JointConfig& q_prev, const JointConfig& q,
                                    const JointConfig* q_prev2, double dt, double dt_prev) {
  if (!(dt > 0.0)) throw std::invalid_argument("check_differential: dt must be positive");
  if (dt_prev == 0.0) dt_prev = dt;
  if (!(dt_prev > 0.0)) throw std::invalid_argument("check_differential: dt_prev must be positive");
  ConstraintReport out;
  const double vx = (q.base.x - q_prev.base.x) / dt;
  const double vy = (q.base.y - q_prev.base.y) / dt;
  const double omega = angle_difference(q.base.h, q_prev.base.h) / dt;
  const double speed = std::hypot(vx, vy);
  if (speed > model.base_limits.v_max + kSlack) out.add(constraint::kBaseSpeed, speed - model.base_limits.v_max);
  if (std::abs(omega) > model.base_limits.omega_max + kSlack)
    out.add(constraint::kBaseTurnRate, std::abs(omega) - model.base_limits.omega_max);
  for (int k = 0; k < model.arm_dof(); ++k) {
    const ArmJoint& j = model.arm_joints[k];
    const double v = (q.arm[k] - q_prev.arm[k]) / dt;
    if (std::abs(v) > j.vel_max + kSlack) out.add(constraint::kJointVelocity, std::abs(v) - j.vel_max, j.name);
    if (q_prev2 != nullptr) {
      const double v_prev = (q_prev.arm[k] - q_prev2->arm[k]) / dt_prev;
      const double a = (v - v_prev) / dt;
      if (std::abs(a) > j.acc_max + kSlack)
        out.add(constraint::kJointAcceleration, std::abs(a) - j.acc_max, j.name);
    }
  }
  return out;
}

ConstraintReport check_rolling(const JointConfig& q_prev, const JointConfig& q, double dt, const RobotModel& model,
                               double tol) {
  if (!(dt > 0.0)) throw std::invalid_argument("check_rolling: dt must be positive");
  ConstraintReport out;
  const double dx = q.base.x - q_prev.base.x;
  const double dy = q.base.y - q_prev.base.y;
  if (std::hypot(dx, dy) > 1e-9) {
    const double theta = std::atan2(dy, dx);
    const double misalignment = std::abs(angle_difference(q.base.h, theta));
    if (misalignment > tol + 1e-12) out.add(constraint::kHeadingMisaligned, misalignment - tol);
  }
  const double needed = maneuver_time(q_prev.base, q.base, model.base_limits);
  if (needed > dt * (1.0 + 1e-12)) out.add(constraint::kTiming, needed - dt);
  return out;
}

bool in_B(const RobotModel& model, const Scene& scene, const JointConfig& q, const JointConfig* q_prev,
          const JointConfig* q_prev2, double dt, bool is_final, double heading_tol) {
  if (!check_positional(model, scene, q, is_final).feasible()) return false;
  if (q_prev == nullptr) return true;
  return check_differential(model, *q_prev, q, q_prev2, dt).feasible() &&
         check_rolling(*q_prev, q, dt, model, heading_tol).feasible();
}

ConstraintReport check_trajectory(const RobotModel& model, const Scene& scene, const JointTrajectory& traj,
                                  int samples_per_interval, double heading_tol) {
  if (samples_per_interval < 1) throw std::invalid_argument("check_trajectory: samples_per_interval must be >= 1");
  ConstraintReport out;
  if (const auto* d = std::get_if<DiscreteTrajectory>(&traj.representation)) {
    const std::size_t n = d->configs.size();
    for (std::size_t i = 0; i < n; ++i) {
      const int w = static_cast<int>(i);
      out.append(check_positional(model, scene, d->configs[i], i + 1 == n), w, d->times[i]);
      if (i == 0) continue;
      const double dt = d->times[i] - d->times[i - 1];
      const JointConfig* prev2 = i >= 2 ? &d->configs[i - 2] : nullptr;
      const double dt_prev = i >= 2 ? d->times[i - 1] - d->times[i - 2] : 0.0;
      out.append(check_differential(model, d->configs[i - 1], d->configs[i], prev2, dt, dt_prev), w, d->times[i]);
      out.append(check_rolling(d->configs[i - 1], d->configs[i], dt, model, heading_tol), w, d->times[i]);
    }
    return out;
  }

  const auto& spline = std::get<SplineTrajectory>(traj.representation);
  const auto& excess = spline.base.timing_excess();
  for (std::size_t i = 0; i < excess.size(); ++i)
    if (excess[i] > kSlack) {
      ConstraintReport r;
      r.add(constraint::kTiming, excess[i], "interval " + std::to_string(i));
      out.append(r, static_cast<int>(i), spline.base.times()[i]);
    }
  const std::vector<double> times = sample_times(spline.base.times(), samples_per_interval);
  for (std::size_t s = 0; s < times.size(); ++s) {
    const double t = times[s];
    const bool is_final = s + 1 == times.size();
    const TrajectorySample sample = eval_trajectory(spline, t);
    ConstraintReport r = check_positional(model, scene, sample.q, is_final);
    const double vx = sample.q_dot.base[0];
    const double vy = sample.q_dot.base[1];
    const double speed = std::hypot(vx, vy);
    if (speed > model.base_limits.v_max + kSlack) r.add(constraint::kBaseSpeed, speed - model.base_limits.v_max);
    const double omega = std::abs(sample.q_dot.base[2]);
    if (omega > model.base_limits.omega_max + kSlack)
      r.add(constraint::kBaseTurnRate, omega - model.base_limits.omega_max);
    if (sample.translating && speed > 0.0) {
      const double h = sample.q.base.h;
      const double residual = std::abs(std::cos(h) * vy - std::sin(h) * vx) / speed;
      const bool forward = std::cos(h) * vx + std::sin(h) * vy > 0.0;
      if (residual > kRollingResidual || !forward) r.add(constraint::kHeadingMisaligned, forward ? residual : 1.0);
    }
    for (int k = 0; k < model.arm_dof(); ++k) {
      const ArmJoint& j = model.arm_joints[k];
      const double v = std::abs(sample.q_dot.arm[k]);
      const double a = std::abs(sample.q_ddot.arm[k]);
      if (v > j.vel_max + kSlack) r.add(constraint::kJointVelocity, v - j.vel_max, j.name);
      if (a > j.acc_max + kSlack) r.add(constraint::kJointAcceleration, a - j.acc_max, j.name);
    }
    out.append(r, -1, t);
  }
  return out;
}

}  // namespace optiwb
