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

#include "optiwb/model.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace optiwb {
namespace {

std::string join(const std::vector<std::string>& items) {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size(); ++i) out << (i ? "; " : "") << items[i];
  return out.str();
}

void append_prefixed(std::vector<std::string>& out, const std::string& prefix,
                     const std::vector<std::string>& issues) {
  for (const std::string& issue : issues) out.push_back(prefix + ": " + issue);
}

bool is_unit(const Quat& q) { return std::abs(q.norm() - 1.0) < 1e-9; }

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::runtime_error("validation failed: " + join(violations)), violations_(std::move(violations)) {}

double JointTrajectory::start_time() const {
  if (const auto* d = std::get_if<DiscreteTrajectory>(&representation)) return d->times.front();
  return std::get<SplineTrajectory>(representation).base.start_time();
}

double JointTrajectory::end_time() const {
  if (const auto* d = std::get_if<DiscreteTrajectory>(&representation)) return d->times.back();
  return std::get<SplineTrajectory>(representation).base.end_time();
}

std::vector<std::string> validate_model(const RobotModel& model) {
  std::vector<std::string> v;
  if (!(model.base_limits.v_max > 0.0)) v.emplace_back("base_limits.v_max: must be positive");
  if (!(model.base_limits.omega_max > 0.0)) v.emplace_back("base_limits.omega_max: must be positive");
  if (model.arm_dof() < 6)
    v.emplace_back("arm_joints: need at least 6 joints, got " + std::to_string(model.arm_dof()));
  for (int i = 0; i < model.arm_dof(); ++i) {
    const ArmJoint& j = model.arm_joints[i];
    const std::string p = "arm_joints[" + std::to_string(i) + "]";
    if (!(j.pos_min < j.pos_max)) v.push_back(p + ": pos_min must be below pos_max");
    if (!(j.vel_max > 0.0)) v.push_back(p + ": vel_max must be positive");
    if (!(j.acc_max > 0.0)) v.push_back(p + ": acc_max must be positive");
    if (std::abs(j.axis.norm() - 1.0) > 1e-9) v.push_back(p + ": axis must be a unit vector");
    if (!is_unit(j.origin.rotation)) v.push_back(p + ": origin rotation must be a unit quaternion");
  }
  for (std::size_t i = 0; i < model.link_volumes.size(); ++i) {
    const LinkVolume& lv = model.link_volumes[i];
    const std::string p = "link_volumes[" + std::to_string(i) + "]";
    if (lv.frame < 0 || lv.frame > model.arm_dof()) v.push_back(p + ": frame index out of range");
    append_prefixed(v, p, validate_volume(lv.volume));
  }
  if (!is_unit(model.arm_mount_transform.rotation)) v.emplace_back("arm_mount_transform: rotation not unit");
  if (!is_unit(model.camera_transform.rotation)) v.emplace_back("camera_transform: rotation not unit");
  if (!(model.camera_ccd.width > 0.0) || !(model.camera_ccd.height > 0.0) || !(model.camera_ccd.focal > 0.0))
    v.emplace_back("camera_ccd: width, height and focal must be positive");
  return v;
}

std::vector<std::string> validate_scene(const Scene& scene, const TaskTrajectory& task, const RobotModel* model) {
  std::vector<std::string> v;
  if (!(scene.sun.elevation > 0.0 && scene.sun.elevation <= std::numbers::pi / 2 + 1e-12))
    v.emplace_back("scene.sun.elevation: must lie in (0, pi/2]");
  if (!std::isfinite(scene.sun.azimuth)) v.emplace_back("scene.sun.azimuth: must be finite");
  if (scene.target_position.z() < 0.0) v.emplace_back("scene.target: z must be >= 0");
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i)
    append_prefixed(v, "scene.obstacles[" + std::to_string(i) + "]", validate_volume(scene.obstacles[i]));
  for (std::size_t i = 0; i < scene.forbidden_areas.size(); ++i) {
    const std::string p = "scene.forbidden_areas[" + std::to_string(i) + "]";
    if (const auto* poly = std::get_if<Polygon>(&scene.forbidden_areas[i]))
      append_prefixed(v, p, validate_polygon(*poly));
    else
      append_prefixed(v, p, validate_grid(std::get<OccupancyGrid>(scene.forbidden_areas[i])));
  }

  const auto& wps = task.waypoints;
  if (wps.empty()) {
    v.emplace_back("task.waypoints: must not be empty");
    return v;
  }
  if (wps.front().t != 0.0) v.emplace_back("task.waypoints[0].t: first timestamp must be 0");
  std::set<int> index_set;
  for (const FixedJoint& f : wps.front().fixed_joints) index_set.insert(f.arm_joint_index);
  if (index_set.size() != wps.front().fixed_joints.size())
    v.emplace_back("task.waypoints[0].fixed_joints: duplicate joint index");
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const std::string p = "task.waypoints[" + std::to_string(i) + "]";
    if (i > 0 && !(wps[i].t > wps[i - 1].t)) v.push_back(p + ".t: timestamps must strictly increase");
    if (!is_unit(wps[i].orientation)) v.push_back(p + ".orientation: must be a unit quaternion");
    std::set<int> here;
    for (const FixedJoint& f : wps[i].fixed_joints) {
      here.insert(f.arm_joint_index);
      if (model != nullptr && (f.arm_joint_index < 0 || f.arm_joint_index >= model->arm_dof()))
        v.push_back(p + ".fixed_joints: joint index " + std::to_string(f.arm_joint_index) + " out of range");
    }
    if (here != index_set) v.push_back(p + ".fixed_joints: index set differs from waypoint 0");
  }
  if (model != nullptr) {
    const int redundancy = model->total_dof() - task.task_dimension();
    if (redundancy <= 0)
      v.emplace_back("task: no redundancy (n = " + std::to_string(model->total_dof()) +
                     ", m = " + std::to_string(task.task_dimension()) + ")");
  }
  return v;
}

std::vector<std::string> validate_config(const PlannerConfig& c) {
  std::vector<std::string> v;
  if (!(c.grid.dx > 0.0)) v.emplace_back("config.grid.dx: must be positive");
  if (!(c.grid.dy > 0.0)) v.emplace_back("config.grid.dy: must be positive");
  if (!(c.grid.dh > 0.0)) v.emplace_back("config.grid.dh: must be positive");
  const auto check_range = [&](const std::optional<Interval>& r, const char* name) {
    if (r && !(r->lo <= r->hi)) v.push_back(std::string("config.grid.") + name + ": lo must not exceed hi");
  };
  check_range(c.grid.x_range, "x_range");
  check_range(c.grid.y_range, "y_range");
  check_range(c.grid.h_range, "h_range");
  if (!(c.sigma >= 0.0 && c.sigma <= 1.0)) v.emplace_back("config.sigma: must lie in [0, 1]");
  if (c.smoothing.samples_per_interval < 2) v.emplace_back("config.smoothing.samples_per_interval: must be >= 2");
  if (c.smoothing.max_iterations < 0) v.emplace_back("config.smoothing.max_iterations: must be >= 0");
  if (!(c.smoothing.constraint_tol > 0.0)) v.emplace_back("config.smoothing.constraint_tol: must be positive");
  if (!(c.ik.residual_tol > 0.0) || !(c.ik.accept_tol > 0.0)) v.emplace_back("config.ik: tolerances must be positive");
  if (c.ik.max_branches < 1) v.emplace_back("config.ik.max_branches: must be >= 1");
  if (c.ik.seeds_per_joint < 1) v.emplace_back("config.ik.seeds_per_joint: must be >= 1");
  if (c.rolling_heading_tol && !(*c.rolling_heading_tol >= 0.0))
    v.emplace_back("config.rolling_heading_tol: must be non-negative");
  return v;
}

void require_valid(const RobotModel& model, const Scene& scene, const TaskTrajectory& task,
                   const PlannerConfig& config) {
  std::vector<std::string> all = validate_model(model);
  auto more = validate_scene(scene, task, &model);
  all.insert(all.end(), more.begin(), more.end());
  more = validate_config(config);
  all.insert(all.end(), more.begin(), more.end());
  if (config.snv_weights && config.snv_weights->size() != model.total_dof())
    all.emplace_back("config.snv_weights: need one weight per joint");
  if (!all.empty()) throw ValidationError(std::move(all));
}

Ray sun_ray(const Scene& scene) { return {scene.target_position, sun_direction(scene.sun)}; }

}  // namespace optiwb
