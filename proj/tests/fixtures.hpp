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

#include <cmath>
#include <random>

#include "optiwb/model.hpp"

namespace optiwb::testing {

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

/// Seven-joint arm with spherical shoulder and wrist (link lengths of a
/// 14 kg-class collaborative arm) mounted on a box rover.
inline RobotModel rover_arm() {
  RobotModel m;
  m.base_limits = {0.2, 0.4};
  const double offsets[7] = {0.1575, 0.2025, 0.2045, 0.2155, 0.1845, 0.2155, 0.081};
  const double limits[7] = {170, 120, 170, 120, 170, 120, 175};
  const double vel[7] = {85, 85, 100, 75, 130, 135, 135};
  for (int k = 0; k < 7; ++k) {
    ArmJoint j;
    j.name = "a" + std::to_string(k + 1);
    j.axis = (k % 2 == 0) ? Vec3::UnitZ() : Vec3::UnitY();
    if (k == 3) j.axis = -Vec3::UnitY();
    j.origin = Transform3d::FromTranslation(Vec3(0, 0, offsets[k]));
    j.pos_min = -deg(limits[k]);
    j.pos_max = deg(limits[k]);
    j.vel_max = deg(vel[k]);
    j.acc_max = 1.0;
    m.arm_joints.push_back(j);
  }
  m.arm_mount_transform = Transform3d::FromTranslation(Vec3(0.35, -0.12, 0.6));
  m.tool_transform = Transform3d::FromTranslation(Vec3(0, 0, 0.045));
  m.link_volumes = {
      {"chassis", 0, Box{Vec3(0.5, 0.35, 0.2), Transform3d::FromTranslation(Vec3(0, 0, 0.4))}},
      {"link1", 1, Capsule{0.08, Vec3(0, 0, -0.1575), Vec3(0, 0, 0.0)}},
      {"link2", 2, Capsule{0.07, Vec3(0, 0, 0.0), Vec3(0, 0, 0.2045)}},
      {"link3", 3, Capsule{0.07, Vec3(0, 0, 0.0), Vec3(0, 0, 0.2155)}},
      {"link4", 4, Capsule{0.065, Vec3(0, 0, 0.0), Vec3(0, 0, 0.1845)}},
      {"link5", 5, Capsule{0.065, Vec3(0, 0, 0.0), Vec3(0, 0, 0.12)}},
      {"link6", 6, Capsule{0.06, Vec3(0, 0, 0.0), Vec3(0, 0, 0.0)}},
      {"link7", 7, Capsule{0.045, Vec3(0, 0, 0.0), Vec3(0, 0, 0.045)}},
  };
  m.camera_transform = {Quat(Eigen::AngleAxisd(deg(15), Vec3::UnitY())), Vec3(0.25, 0.2, 1.1)};
  m.camera_ccd = {0.008, 0.006, 0.006};
  return m;
}

inline VecX random_arm(const RobotModel& m, std::mt19937_64& rng, double shrink = 1.0) {
  VecX q(m.arm_dof());
  for (int k = 0; k < m.arm_dof(); ++k) {
    const double mid = 0.5 * (m.arm_joints[k].pos_min + m.arm_joints[k].pos_max);
    const double half = 0.5 * (m.arm_joints[k].pos_max - m.arm_joints[k].pos_min) * shrink;
    q[k] = std::uniform_real_distribution<double>(mid - half, mid + half)(rng);
  }
  return q;
}

}  // namespace optiwb::testing
