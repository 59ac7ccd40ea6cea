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

#include <optional>
#include <stdexcept>
#include <vector>

#include "optiwb/model.hpp"

namespace optiwb {

class KinematicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// World poses of every frame: index 0 is the base, k >= 1 the frame after
/// arm joint k.
struct ChainPoses {
  std::vector<Transform3d> frames;
  Transform3d end_effector;
};

ChainPoses chain_poses(const RobotModel& model, const JointConfig& q);

Transform3d forward_kinematics(const RobotModel& model, const JointConfig& q);

/// Rotation about the unit axis of a revolute joint.
template <typename Scalar>
Eigen::Matrix<Scalar, 3, 3> axis_rotation(const Eigen::Matrix<Scalar, 3, 1>& axis, Scalar angle) {
  using std::cos;
  using std::sin;
  Eigen::Matrix<Scalar, 3, 3> k;
  k << Scalar(0), -axis.z(), axis.y(), axis.z(), Scalar(0), -axis.x(), -axis.y(), axis.x(), Scalar(0);
  return Eigen::Matrix<Scalar, 3, 3>::Identity() + sin(angle) * k + (Scalar(1) - cos(angle)) * (k * k);
}

Transform3d base_transform(const BasePose& base);

/// T_c^w = T_b^w(q_b) * T_c^b.
Transform3d camera_pose(const RobotModel& model, const BasePose& base);

struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
  bool in_bounds = false;
};

/// Pinhole projection onto the CCD plane: u = f y / x, v = f z / x in the
/// camera frame. Empty when the target is not in front of the camera.
std::optional<ImagePoint> project_target(const RobotModel& model, const BasePose& base, const Vec3& target);

struct IkSolution {
  JointConfig config;
  int branch_id = 0;
  double position_residual = 0.0;
  double orientation_residual = 0.0;
};

struct IkSolutionSet {
  std::vector<IkSolution> solutions;
  /// Converged solutions discarded for leaving the joint box.
  int rejected_by_limits = 0;
  /// True when the reach test ruled the pose out before iterating.
  bool prefiltered = false;
};

/// Redundancy-parametrised inverse kinematics for a fixed set of task-locked
/// arm joints. With the base pose given and the locked joints set, six free
/// arm joints remain and the pose equations become square. Converged
/// solutions are deduplicated, filtered by joint limits and labelled by
/// lexicographic order of their arm vectors.
class IkSolver {
 public:
  IkSolver(const RobotModel& model, IkConfig config, std::vector<int> fixed_indices);

  IkSolutionSet solve(const Transform3d& pose, const std::vector<FixedJoint>& fixed, const BasePose& nu) const;

  /// Single damped least-squares descent from `seed_arm`; empty if it does
  /// not converge within limits. `tolerance` <= 0 uses the configured one.
  std::optional<JointConfig> refine(const Transform3d& pose, const std::vector<FixedJoint>& fixed,
                                    const BasePose& nu, const VecX& seed_arm, double tolerance = 0.0) const;

  /// Cheap necessary condition for reachability from base pose `nu`.
  bool maybe_reachable(const Transform3d& pose, const BasePose& nu) const;

  const std::vector<int>& free_indices() const { return free_; }
  bool uses_decoupled_wrist() const { return decoupled_; }
  /// Upper bound on the distance from the arm mount to the end effector.
  double reach() const { return reach_; }

 private:
  Transform3d flange_target(const Transform3d& pose, const BasePose& nu) const;
  bool descend(const Transform3d& flange, VecX& arm, const std::vector<int>& moving, int iterations,
               double tolerance, int task_kind) const;
  void finish(const Transform3d& pose, const BasePose& nu, std::vector<VecX>& candidates, IkSolutionSet& out) const;
  std::vector<VecX> closed_form(const Transform3d& flange, const VecX& base) const;
  std::vector<VecX> seeds_for(const std::vector<int>& joints, const VecX& base) const;

  const RobotModel* model_;
  IkConfig config_;
  std::vector<int> fixed_;
  std::vector<int> free_;
  std::vector<int> position_joints_;
  std::vector<int> wrist_joints_;
  bool decoupled_ = false;
  bool analytic_ = false;
  std::vector<Vec3> home_axes_;
  Mat3 home_flange_ = Mat3::Identity();
  Vec3 shoulder_ = Vec3::Zero();      // root frame
  Vec3 wrist_offset_ = Vec3::Zero();  // flange frame
  Vec3 wrist_local_ = Vec3::Zero();   // frame after joint n - 3
  double wrist_min_ = 0.0;
  double wrist_max_ = 0.0;
  Vec3 first_origin_ = Vec3::Zero();
  double reach_ = 0.0;
};

/// One-shot convenience wrapper around IkSolver.
IkSolutionSet augmented_ik(const RobotModel& model, const Transform3d& pose, const std::vector<FixedJoint>& fixed,
                           const BasePose& nu, const IkConfig& config = {});

/// Arm-frame end-effector position error and orientation error of `q`.
std::pair<double, double> pose_residual(const RobotModel& model, const JointConfig& q, const Transform3d& pose);

}  // namespace optiwb
