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

// Reference implementations written without the library, used as test oracles.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "optiwb/geometry.hpp"
#include "optiwb/model.hpp"

namespace optiwb::oracle {

using Mat4 = Eigen::Matrix4d;

inline Mat4 homogeneous(const Eigen::Matrix3d& r, const Eigen::Vector3d& t) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  return m;
}

inline Mat4 homogeneous(const Transform3d& tf) {
  return homogeneous(tf.rotation.normalized().toRotationMatrix(), tf.translation);
}

inline Mat4 rot_z(double a) {
  Mat4 m = Mat4::Identity();
  m(0, 0) = std::cos(a);
  m(0, 1) = -std::sin(a);
  m(1, 0) = std::sin(a);
  m(1, 1) = std::cos(a);
  return m;
}

// Rotation about a unit axis from the outer-product form
// R = c I + s [a]x + (1 - c) a a^T.
inline Mat4 rot_axis(const Eigen::Vector3d& axis, double angle) {
  const Eigen::Vector3d a = axis.normalized();
  Eigen::Matrix3d cross;
  cross << 0, -a.z(), a.y(), a.z(), 0, -a.x(), -a.y(), a.x(), 0;
  const double c = std::cos(angle), s = std::sin(angle);
  return homogeneous(c * Eigen::Matrix3d::Identity() + s * cross + (1 - c) * a * a.transpose(),
                     Eigen::Vector3d::Zero());
}

inline Mat4 translate(double x, double y, double z) {
  Mat4 m = Mat4::Identity();
  m(0, 3) = x;
  m(1, 3) = y;
  m(2, 3) = z;
  return m;
}

// World pose of the tool as a product of 4x4 matrices.
inline Mat4 fk_matrix(const RobotModel& model, double x, double y, double h, const Eigen::VectorXd& arm) {
  Mat4 m = translate(x, y, 0) * rot_z(h) * homogeneous(model.arm_mount_transform);
  for (int k = 0; k < model.arm_dof(); ++k)
    m = m * homogeneous(model.arm_joints[k].origin) * rot_axis(model.arm_joints[k].axis, arm[k]);
  return m * homogeneous(model.tool_transform);
}

// Slab test for the ray s >= 0 against an oriented box.
inline bool ray_hits_box(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir, const Box& box) {
  const Eigen::Matrix3d r = box.pose.rotation.normalized().toRotationMatrix();
  const Eigen::Vector3d o = r.transpose() * (origin - box.pose.translation);
  const Eigen::Vector3d d = r.transpose() * dir;
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 3; ++k) {
    const double h = box.half_extents[k];
    if (std::abs(d[k]) < 1e-300) {
      if (o[k] < -h || o[k] > h) return false;
      continue;
    }
    double t0 = (-h - o[k]) / d[k];
    double t1 = (h - o[k]) / d[k];
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
    if (lo > hi) return false;
  }
  return true;
}

// Winding number of a closed polygon around p (non-zero means inside).
inline int winding_number(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& v) {
  int wn = 0;
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::Vector2d& a = v[i];
    const Eigen::Vector2d& b = v[(i + 1) % n];
    const double side = (b.x() - a.x()) * (p.y() - a.y()) - (p.x() - a.x()) * (b.y() - a.y());
    if (a.y() <= p.y()) {
      if (b.y() > p.y() && side > 0) ++wn;
    } else if (b.y() <= p.y() && side < 0) {
      --wn;
    }
  }
  return wn;
}

// Convex solids with a membership test, an interior sampler and a support
// function, all computed from their defining parameters.
struct SolidBox {
  Eigen::Matrix3d r;
  Eigen::Vector3d c, h;
};
struct SolidCapsule {
  Eigen::Vector3d a, b;
  double radius;
};
struct SolidTetra {
  Eigen::Vector3d v[4];
};
// c + A [-1, 1]^3
struct SolidParallelepiped {
  Eigen::Matrix3d a;
  Eigen::Vector3d c;
};
using Solid = std::variant<SolidBox, SolidCapsule, SolidTetra, SolidParallelepiped>;

inline double segment_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const Eigen::Vector3d ab = b - a;
  const double len2 = ab.squaredNorm();
  const double s = len2 > 0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + s * ab)).norm();
}

inline bool contains(const Solid& solid, const Eigen::Vector3d& p) {
  struct V {
    const Eigen::Vector3d& p;
    bool operator()(const SolidBox& s) const {
      return ((s.r.transpose() * (p - s.c)).cwiseAbs() - s.h).maxCoeff() <= 0;
    }
    bool operator()(const SolidCapsule& s) const { return segment_distance(p, s.a, s.b) <= s.radius; }
    bool operator()(const SolidTetra& s) const {
      Eigen::Matrix3d m;
      m << s.v[1] - s.v[0], s.v[2] - s.v[0], s.v[3] - s.v[0];
      const Eigen::Vector3d l = m.fullPivLu().solve(p - s.v[0]);
      return l.minCoeff() >= 0 && l.sum() <= 1;
    }
    bool operator()(const SolidParallelepiped& s) const {
      return s.a.fullPivLu().solve(p - s.c).cwiseAbs().maxCoeff() <= 1;
    }
  };
  return std::visit(V{p}, solid);
}

inline std::vector<Eigen::Vector3d> corners(const Solid& solid) {
  std::vector<Eigen::Vector3d> out;
  if (const auto* b = std::get_if<SolidBox>(&solid)) {
    for (int m = 0; m < 8; ++m) {
      const Eigen::Vector3d s((m & 1) ? 1 : -1, (m & 2) ? 1 : -1, (m & 4) ? 1 : -1);
      out.push_back(b->c + b->r * s.cwiseProduct(b->h));
    }
  } else if (const auto* c = std::get_if<SolidCapsule>(&solid)) {
    out = {c->a, c->b};
  } else if (const auto* t = std::get_if<SolidTetra>(&solid)) {
    out.assign(t->v, t->v + 4);
  } else {
    const auto& q = std::get<SolidParallelepiped>(solid);
    for (int m = 0; m < 8; ++m) {
      const Eigen::Vector3d s((m & 1) ? 1 : -1, (m & 2) ? 1 : -1, (m & 4) ? 1 : -1);
      out.push_back(q.c + q.a * s);
    }
  }
  return out;
}

inline double support_value(const Solid& solid, const Eigen::Vector3d& d) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& v : corners(solid)) best = std::max(best, d.dot(v));
  if (const auto* c = std::get_if<SolidCapsule>(&solid)) best += c->radius * d.norm();
  return best;
}

inline Eigen::Vector3d unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Vector3d v(n(rng), n(rng), n(rng));
  return v.normalized();
}

inline Eigen::Vector3d sample_inside(const Solid& solid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  struct V {
    std::mt19937_64& rng;
    std::uniform_real_distribution<double>& u;
    std::uniform_real_distribution<double>& u01;
    Eigen::Vector3d operator()(const SolidBox& s) const {
      const Eigen::Vector3d w(u(rng), u(rng), u(rng));
      return s.c + s.r * w.cwiseProduct(s.h);
    }
    Eigen::Vector3d operator()(const SolidCapsule& s) const {
      const double t = u01(rng);
      return s.a + t * (s.b - s.a) + s.radius * std::cbrt(u01(rng)) * unit_vector(rng);
    }
    Eigen::Vector3d operator()(const SolidTetra& s) const {
      double w[4], sum = 0;
      for (double& x : w) sum += (x = -std::log(1.0 - u01(rng)));
      Eigen::Vector3d p = Eigen::Vector3d::Zero();
      for (int k = 0; k < 4; ++k) p += w[k] / sum * s.v[k];
      return p;
    }
    Eigen::Vector3d operator()(const SolidParallelepiped& s) const {
      return s.c + s.a * Eigen::Vector3d(u(rng), u(rng), u(rng));
    }
  };
  return std::visit(V{rng, u, u01}, solid);
}

enum class Verdict { kIntersect, kSeparate, kUndecided };

// A common point certifies intersection; a direction with a positive gap
// between the support values certifies separation.
inline Verdict sampled_intersection(const Solid& a, const Solid& b, std::mt19937_64& rng, int points = 4000,
                                    int directions = 3000) {
  for (int k = 0; k < points; ++k) {
    if (contains(b, sample_inside(a, rng))) return Verdict::kIntersect;
    if (contains(a, sample_inside(b, rng))) return Verdict::kIntersect;
  }
  for (int k = 0; k < directions; ++k) {
    const Eigen::Vector3d d = unit_vector(rng);
    if (-support_value(b, -d) - support_value(a, d) > 1e-9) return Verdict::kSeparate;
  }
  return Verdict::kUndecided;
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  return Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized().toRotationMatrix();
}

// Random solid with centre in [-extent, extent]^3, paired with the library
// volume describing the same set.
inline std::pair<Solid, ConvexVolume> random_solid(std::mt19937_64& rng, double extent) {
  std::uniform_real_distribution<double> pos(-extent, extent);
  std::uniform_real_distribution<double> size(0.1, 0.6);
  const Eigen::Vector3d c(pos(rng), pos(rng), pos(rng));
  const Eigen::Matrix3d r = random_rotation(rng);
  const Eigen::Quaterniond q(r);
  switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
    case 0: {
      const Eigen::Vector3d h(size(rng), size(rng), size(rng));
      return {SolidBox{r, c, h}, Box{h, Transform3d(q, c)}};
    }
    case 1: {
      const Eigen::Vector3d half = size(rng) * unit_vector(rng);
      const double radius = 0.5 * size(rng);
      return {SolidCapsule{c - half, c + half, radius}, Capsule{radius, c - half, c + half}};
    }
    case 2: {
      const double radius = size(rng);
      return {SolidCapsule{c, c, radius}, Capsule{radius, c, c}};
    }
    case 3: {
      SolidTetra t;
      ConvexHull hull;
      hull.pose = Transform3d(q, c);
      // Regular-ish tetrahedron, jittered, in the local frame.
      const Eigen::Vector3d base[4] = {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}};
      const double s = size(rng);
      for (int k = 0; k < 4; ++k) {
        const Eigen::Vector3d local = s * (base[k] + 0.3 * Eigen::Vector3d(pos(rng), pos(rng), pos(rng)) / extent);
        hull.vertices.push_back(local);
        t.v[k] = r * local + c;
      }
      return {t, hull};
    }
    default: {
      Eigen::Matrix3d a = Eigen::Matrix3d::Identity() * size(rng);
      for (int i = 0; i < 9; ++i) a(i / 3, i % 3) += 0.15 * pos(rng) / extent;
      SolidParallelepiped p{r * a, c};
      ConvexHull hull;
      hull.pose = Transform3d(q, c);
      for (int m = 0; m < 8; ++m)
        hull.vertices.push_back(a * Eigen::Vector3d((m & 1) ? 1 : -1, (m & 2) ? 1 : -1, (m & 4) ? 1 : -1));
      return {p, hull};
    }
  }
}

}  // namespace optiwb::oracle
