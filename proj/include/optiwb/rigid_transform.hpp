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
#include <numbers>

#include <Eigen/Dense>
#include <Eigen/Geometry>

namespace optiwb {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Rotation + translation pair acting as x -> R x + t.
template <typename Scalar>
struct RigidTransform {
  using Vector3 = Eigen::Matrix<Scalar, 3, 1>;
  using Quaternion = Eigen::Quaternion<Scalar>;

  Quaternion rotation = Quaternion::Identity();
  Vector3 translation = Vector3::Zero();

  RigidTransform() = default;
  RigidTransform(const Quaternion& r, const Vector3& t) : rotation(r), translation(t) {}

  static RigidTransform Identity() { return {}; }
  static RigidTransform FromTranslation(const Vector3& t) { return {Quaternion::Identity(), t}; }
  static RigidTransform FromRotation(const Quaternion& r) { return {r, Vector3::Zero()}; }

  Vector3 operator*(const Vector3& p) const { return rotation * p + translation; }

  RigidTransform operator*(const RigidTransform& other) const {
    return {(rotation * other.rotation).normalized(), rotation * other.translation + translation};
  }

  RigidTransform inverse() const {
    const Quaternion inv = rotation.conjugate();
    return {inv, -(inv * translation)};
  }

  Eigen::Matrix<Scalar, 3, 3> rotation_matrix() const { return rotation.toRotationMatrix(); }

  Eigen::Matrix<Scalar, 4, 4> matrix() const {
    Eigen::Matrix<Scalar, 4, 4> m = Eigen::Matrix<Scalar, 4, 4>::Identity();
    m.template topLeftCorner<3, 3>() = rotation_matrix();
    m.template topRightCorner<3, 1>() = translation;
    return m;
  }

  /// Moves a direction (no translation).
  Vector3 rotate(const Vector3& v) const { return rotation * v; }

  template <typename Other>
  RigidTransform<Other> cast() const {
    return {rotation.template cast<Other>(), translation.template cast<Other>()};
  }
};

using Transform3d = RigidTransform<double>;

/// Geodesic angle between two orientations, in [0, pi].
template <typename Scalar>
Scalar rotation_distance(const Eigen::Quaternion<Scalar>& a, const Eigen::Quaternion<Scalar>& b) {
  using std::abs;
  using std::atan2;
  const Eigen::Quaternion<Scalar> d = a.conjugate() * b;
  const Scalar w = abs(d.w());
  return Scalar(2) * atan2(d.vec().norm(), w);
}

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double wrapped = std::remainder(angle, kTwoPi);
  if (wrapped <= -std::numbers::pi) wrapped += kTwoPi;
  return wrapped;
}

/// Signed shortest rotation taking `from` onto `to`, in (-pi, pi].
inline double angle_difference(double to, double from) { return normalize_angle(to - from); }

inline Quat yaw_rotation(double yaw) { return Quat(Eigen::AngleAxisd(yaw, Vec3::UnitZ())); }

/// Homogeneous transform of a planar base pose (x, y, heading) on flat ground.
inline Transform3d planar_transform(double x, double y, double heading) {
  return {yaw_rotation(heading), Vec3(x, y, 0.0)};
}

}  // namespace optiwb
