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

#include "optiwb/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace optiwb {
namespace {

constexpr double kGjkTolerance = 1e-9;
constexpr int kGjkMaxIterations = 96;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Support of the radius-free core of a volume.
Vec3 core_support(const ConvexVolume& volume, const Vec3& d) {
  return std::visit(
      Overloaded{
          [&](const Box& box) -> Vec3 {
            const Vec3 local = box.pose.rotation.conjugate() * d;
            const Vec3 corner(local.x() >= 0 ? box.half_extents.x() : -box.half_extents.x(),
                              local.y() >= 0 ? box.half_extents.y() : -box.half_extents.y(),
                              local.z() >= 0 ? box.half_extents.z() : -box.half_extents.z());
            return box.pose * corner;
          },
          [&](const Capsule& capsule) -> Vec3 {
            return capsule.a.dot(d) >= capsule.b.dot(d) ? capsule.a : capsule.b;
          },
          [&](const ConvexHull& hull) -> Vec3 {
            const Vec3 local = hull.pose.rotation.conjugate() * d;
            std::size_t best = 0;
            double best_dot = -std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < hull.vertices.size(); ++i) {
              const double dot = hull.vertices[i].dot(local);
              if (dot > best_dot) {
                best_dot = dot;
                best = i;
              }
            }
            return hull.pose * hull.vertices[best];
          }},
      volume);
}

double core_radius(const ConvexVolume& volume) {
  if (const auto* capsule = std::get_if<Capsule>(&volume)) return capsule->radius;
  return 0.0;
}

// Closest point to the origin on the convex hull of `points`. Reduces
// `points` to the supporting face. Returns false when the origin lies inside
// a full-dimensional simplex.
bool closest_on_simplex(std::vector<Vec3>& points, Vec3& closest) {
  const int count = static_cast<int>(points.size());
  double best_norm = std::numeric_limits<double>::infinity();
  int best_mask = 0;
  Vec3 best_point = Vec3::Zero();

  for (int mask = 1; mask < (1 << count); ++mask) {
    std::array<int, 4> idx{};
    int k = 0;
    for (int i = 0; i < count; ++i)
      if (mask & (1 << i)) idx[k++] = i;

    Vec3 point;
    bool inside = true;
    if (k == 1) {
      point = points[idx[0]];
    } else {
      const Vec3& w0 = points[idx[0]];
      Eigen::Matrix<double, 3, Eigen::Dynamic> edges(3, k - 1);
      for (int j = 1; j < k; ++j) edges.col(j - 1) = points[idx[j]] - w0;
      const Eigen::MatrixXd gram = edges.transpose() * edges;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
      if (ldlt.info() != Eigen::Success || ldlt.rcond() < 1e-14) continue;
      const Eigen::VectorXd mu = ldlt.solve(-(edges.transpose() * w0));
      const double lambda0 = 1.0 - mu.sum();
      if (lambda0 < 0.0 || (mu.array() < 0.0).any()) inside = false;
      if (!inside) continue;
      point = w0 + edges * mu;
      if (k == 4) {
        points = {points[idx[0]], points[idx[1]], points[idx[2]], points[idx[3]]};
        closest = Vec3::Zero();
        return false;
      }
    }
    const double norm = point.squaredNorm();
    if (norm < best_norm) {
      best_norm = norm;
      best_mask = mask;
      best_point = point;
    }
  }

  std::vector<Vec3> reduced;
  for (int i = 0; i < count; ++i)
    if (best_mask & (1 << i)) reduced.push_back(points[i]);
  points = std::move(reduced);
  closest = best_point;
  return true;
}

// GJK distance between the cores of two volumes.
double core_distance(const ConvexVolume& a, const ConvexVolume& b) {
  Vec3 v = centroid(a) - centroid(b);
  if (v.squaredNorm() < 1e-24) v = Vec3::UnitX();
  std::vector<Vec3> simplex;
  simplex.reserve(4);
  double last_norm = std::numeric_limits<double>::infinity();

  for (int iteration = 0; iteration < kGjkMaxIterations; ++iteration) {
    const Vec3 w = core_support(a, -v) - core_support(b, v);
    const double v_norm2 = v.squaredNorm();
    // ||v|| - d <= (||v||^2 - v.w) / ||v||, so this bounds the absolute error.
    if (v_norm2 - v.dot(w) <= kGjkTolerance * std::sqrt(v_norm2)) return std::sqrt(v_norm2);
    bool duplicate = false;
    for (const Vec3& s : simplex)
      if ((s - w).squaredNorm() < 1e-24) duplicate = true;
    if (duplicate) return std::sqrt(v_norm2);
    simplex.push_back(w);
    if (!closest_on_simplex(simplex, v)) return 0.0;
    const double norm = v.norm();
    if (norm <= kGjkTolerance) return 0.0;
    if (norm >= last_norm - 1e-15) return norm;
    last_norm = norm;
  }
  return v.norm();
}

// Per-axis projection overlap for oriented boxes; returns min overlap
// (negative when a separating axis exists).
double box_box_overlap(const Box& a, const Box& b) {
  const Mat3 ra = a.pose.rotation_matrix();
  const Mat3 rb = b.pose.rotation_matrix();
  const Vec3 delta = b.pose.translation - a.pose.translation;
  std::array<Vec3, 15> axes;
  int count = 0;
  for (int i = 0; i < 3; ++i) axes[count++] = ra.col(i);
  for (int i = 0; i < 3; ++i) axes[count++] = rb.col(i);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Vec3 c = ra.col(i).cross(rb.col(j));
      if (c.squaredNorm() > 1e-12) axes[count++] = c.normalized();
    }
  double min_overlap = std::numeric_limits<double>::infinity();
  for (int k = 0; k < count; ++k) {
    const Vec3& axis = axes[k];
    double pa = 0.0, pb = 0.0;
    for (int i = 0; i < 3; ++i) {
      pa += a.half_extents[i] * std::abs(ra.col(i).dot(axis));
      pb += b.half_extents[i] * std::abs(rb.col(i).dot(axis));
    }
    const double overlap = pa + pb - std::abs(delta.dot(axis));
    min_overlap = std::min(min_overlap, overlap);
  }
  return min_overlap;
}

double signed_area(const std::vector<Vec2>& v) {
  double area = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    area += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * area;
}

bool segments_cross_2d(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
  };
  const double d1 = orient(c, d, a), d2 = orient(c, d, b);
  const double d3 = orient(a, b, c), d4 = orient(a, b, d);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

}  // namespace

std::vector<std::string> validate_volume(const ConvexVolume& volume) {
  std::vector<std::string> issues;
  std::visit(Overloaded{[&](const Box& box) {
                          if ((box.half_extents.array() <= 0.0).any() || !box.half_extents.allFinite())
                            issues.emplace_back("box half_extents must be positive");
                        },
                        [&](const Capsule& capsule) {
                          if (!(capsule.radius > 0.0)) issues.emplace_back("capsule radius must be positive");
                          if (!capsule.a.allFinite() || !capsule.b.allFinite())
                            issues.emplace_back("capsule endpoints must be finite");
                        },
                        [&](const ConvexHull& hull) {
                          if (hull.vertices.size() < 4) {
                            issues.emplace_back("hull needs at least 4 vertices");
                            return;
                          }
                          // Non-coplanar: some tetrahedron has non-zero volume.
                          const Vec3& p0 = hull.vertices[0];
                          double max_volume = 0.0;
                          for (std::size_t i = 1; i < hull.vertices.size(); ++i)
                            for (std::size_t j = i + 1; j < hull.vertices.size(); ++j)
                              for (std::size_t k = j + 1; k < hull.vertices.size(); ++k)
                                max_volume = std::max(
                                    max_volume, std::abs((hull.vertices[i] - p0)
                                                             .cross(hull.vertices[j] - p0)
                                                             .dot(hull.vertices[k] - p0)));
                          if (max_volume < 1e-12) issues.emplace_back("hull vertices are coplanar");
                        }},
             volume);
  return issues;
}

std::vector<std::string> validate_polygon(const Polygon& polygon) {
  std::vector<std::string> issues;
  const auto& v = polygon.vertices;
  if (v.size() < 3) {
    issues.emplace_back("polygon needs at least 3 vertices");
    return issues;
  }
  if (std::abs(signed_area(v)) < 1e-12) issues.emplace_back("polygon has zero area");
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_cross_2d(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) {
        issues.emplace_back("polygon edges " + std::to_string(i) + " and " + std::to_string(j) +
                            " intersect");
        return issues;
      }
    }
  }
  return issues;
}

std::vector<std::string> validate_grid(const OccupancyGrid& grid) {
  std::vector<std::string> issues;
  if (!(grid.resolution > 0.0)) issues.emplace_back("grid resolution must be positive");
  if (grid.width <= 0 || grid.height <= 0) issues.emplace_back("grid dimensions must be positive");
  if (grid.cells.size() != static_cast<std::size_t>(std::max(grid.width, 0)) * std::max(grid.height, 0))
    issues.emplace_back("grid cell count does not match width * height");
  return issues;
}

ConvexVolume transformed(const ConvexVolume& volume, const Transform3d& transform) {
  return std::visit(Overloaded{[&](const Box& box) -> ConvexVolume {
                                 return Box{box.half_extents, transform * box.pose};
                               },
                               [&](const Capsule& capsule) -> ConvexVolume {
                                 return Capsule{capsule.radius, transform * capsule.a, transform * capsule.b};
                               },
                               [&](const ConvexHull& hull) -> ConvexVolume {
                                 return ConvexHull{hull.vertices, transform * hull.pose};
                               }},
                    volume);
}

Vec3 support(const ConvexVolume& volume, const Vec3& direction) {
  Vec3 point = core_support(volume, direction);
  const double r = core_radius(volume);
  if (r > 0.0 && direction.squaredNorm() > 0.0) point += r * direction.normalized();
  return point;
}

Vec3 centroid(const ConvexVolume& volume) {
  return std::visit(Overloaded{[](const Box& box) -> Vec3 { return box.pose.translation; },
                               [](const Capsule& capsule) -> Vec3 { return 0.5 * (capsule.a + capsule.b); },
                               [](const ConvexHull& hull) -> Vec3 {
                                 Vec3 sum = Vec3::Zero();
                                 for (const Vec3& p : hull.vertices) sum += p;
                                 return hull.pose * (sum / static_cast<double>(hull.vertices.size()));
                               }},
                    volume);
}

double bounding_radius(const ConvexVolume& volume) {
  return std::visit(Overloaded{[](const Box& box) { return box.half_extents.norm(); },
                               [](const Capsule& capsule) {
                                 return 0.5 * (capsule.a - capsule.b).norm() + capsule.radius;
                               },
                               [](const ConvexHull& hull) {
                                 Vec3 sum = Vec3::Zero();
                                 for (const Vec3& p : hull.vertices) sum += p;
                                 const Vec3 c = sum / static_cast<double>(hull.vertices.size());
                                 double r = 0.0;
                                 for (const Vec3& p : hull.vertices) r = std::max(r, (p - c).norm());
                                 return r;
                               }},
                    volume);
}

double separation_distance(const ConvexVolume& a, const ConvexVolume& b) {
  return std::max(0.0, clearance(a, b));
}

double clearance(const ConvexVolume& a, const ConvexVolume& b) {
  const auto* ca = std::get_if<Capsule>(&a);
  const auto* cb = std::get_if<Capsule>(&b);
  if (ca != nullptr && cb != nullptr) {
    return segment_segment_distance(ca->a, ca->b, cb->a, cb->b) - ca->radius - cb->radius;
  }
  const auto* ba = std::get_if<Box>(&a);
  const auto* bb = std::get_if<Box>(&b);
  if (ba != nullptr && bb != nullptr) {
    const double overlap = box_box_overlap(*ba, *bb);
    if (overlap >= 0.0) return -overlap;
  }
  return core_distance(a, b) - core_radius(a) - core_radius(b);
}

bool volumes_intersect(const ConvexVolume& a, const ConvexVolume& b) {
  const double gap = (centroid(a) - centroid(b)).norm() - bounding_radius(a) - bounding_radius(b);
  if (gap > kGjkTolerance) return false;
  const auto* ba = std::get_if<Box>(&a);
  const auto* bb = std::get_if<Box>(&b);
  if (ba != nullptr && bb != nullptr) return box_box_overlap(*ba, *bb) >= -kGjkTolerance;
  return clearance(a, b) <= kGjkTolerance;
}

double ray_distance(const Ray& ray, const ConvexVolume& volume) {
  const Vec3 c = centroid(volume);
  const double length = (c - ray.origin).norm() + bounding_radius(volume) + 1.0;
  const Capsule segment{0.0, ray.origin, ray.origin + length * ray.direction};
  const ConvexVolume as_volume = segment;
  return separation_distance(as_volume, volume);
}

bool ray_intersects_volume(const Ray& ray, const ConvexVolume& volume) {
  const Vec3 c = centroid(volume);
  const Vec3 rel = c - ray.origin;
  const double along = std::max(0.0, rel.dot(ray.direction));
  const double lateral = (rel - along * ray.direction).norm();
  if (rel.dot(ray.direction) >= 0.0 ? lateral > bounding_radius(volume) + kGjkTolerance
                                    : rel.norm() > bounding_radius(volume) + kGjkTolerance)
    return false;
  return ray_distance(ray, volume) <= kGjkTolerance;
}

double point_segment_distance_2d(const Vec2& p, const Vec2& a, const Vec2& b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squaredNorm();
  double s = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return (p - (a + s * ab)).norm();
}

bool point_in_polygon(const Vec2& p, const Polygon& polygon) {
  const auto& v = polygon.vertices;
  const std::size_t n = v.size();
  double scale = 1.0;
  for (const Vec2& q : v) scale = std::max(scale, q.cwiseAbs().maxCoeff());
  for (std::size_t i = 0; i < n; ++i)
    if (point_segment_distance_2d(p, v[i], v[(i + 1) % n]) <= 1e-12 * scale) return true;
  // Even-odd crossing count on a horizontal ray toward +x.
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = v[i];
    const Vec2& b = v[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = a.x() + (p.y() - a.y()) * (b.x() - a.x()) / (b.y() - a.y());
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool point_in_grid(const Vec2& p, const OccupancyGrid& grid) {
  const Vec2 local = (p - grid.origin) / grid.resolution;
  const double fx = std::floor(local.x());
  const double fy = std::floor(local.y());
  const int ix = static_cast<int>(fx);
  const int iy = static_cast<int>(fy);
  // Points on a cell edge belong to both neighbours.
  const bool on_x = local.x() == fx;
  const bool on_y = local.y() == fy;
  for (int dx = on_x ? -1 : 0; dx <= 0; ++dx)
    for (int dy = on_y ? -1 : 0; dy <= 0; ++dy)
      if (grid.occupied(ix + dx, iy + dy)) return true;
  return false;
}

bool point_in_forbidden(const Vec2& p, const std::vector<ForbiddenArea>& areas) {
  for (const ForbiddenArea& area : areas) {
    const bool hit = std::visit(Overloaded{[&](const Polygon& poly) { return point_in_polygon(p, poly); },
                                           [&](const OccupancyGrid& grid) { return point_in_grid(p, grid); }},
                                area);
    if (hit) return true;
  }
  return false;
}

double forbidden_depth(const Vec2& p, const std::vector<ForbiddenArea>& areas) {
  double depth = 0.0;
  for (const ForbiddenArea& area : areas) {
    if (const auto* poly = std::get_if<Polygon>(&area)) {
      if (!point_in_polygon(p, *poly)) continue;
      double d = std::numeric_limits<double>::infinity();
      const auto& v = poly->vertices;
      for (std::size_t i = 0; i < v.size(); ++i)
        d = std::min(d, point_segment_distance_2d(p, v[i], v[(i + 1) % v.size()]));
      depth = std::max(depth, d);
    } else {
      const auto& grid = std::get<OccupancyGrid>(area);
      if (!point_in_grid(p, grid)) continue;
      constexpr int kWindow = 20;
      const Vec2 local = (p - grid.origin) / grid.resolution;
      const int ix = static_cast<int>(std::floor(local.x()));
      const int iy = static_cast<int>(std::floor(local.y()));
      double d = kWindow * grid.resolution;
      for (int dy = -kWindow; dy <= kWindow; ++dy)
        for (int dx = -kWindow; dx <= kWindow; ++dx) {
          if (grid.occupied(ix + dx, iy + dy)) continue;
          const Vec2 lo = grid.origin + grid.resolution * Vec2(ix + dx, iy + dy);
          const Vec2 hi = lo + Vec2::Constant(grid.resolution);
          const Vec2 nearest = p.cwiseMax(lo).cwiseMin(hi);
          d = std::min(d, (p - nearest).norm());
        }
      depth = std::max(depth, d);
    }
  }
  return depth;
}

Vec3 sun_direction(const Sun& sun) {
  const double ce = std::cos(sun.elevation);
  return {ce * std::cos(sun.azimuth), ce * std::sin(sun.azimuth), std::sin(sun.elevation)};
}

double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1) {
  const Vec3 d1 = p1 - p0;
  const Vec3 d2 = q1 - q0;
  const Vec3 r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  double s = 0.0, t = 0.0;
  constexpr double kEps = 1e-20;
  if (a <= kEps && e <= kEps) return r.norm();
  if (a <= kEps) {
    t = std::clamp(f / e, 0.0, 1.0);
  } else {
    const double c = d1.dot(r);
    if (e <= kEps) {
      s = std::clamp(-c / a, 0.0, 1.0);
    } else {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > kEps * a * e ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0) {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      } else if (t > 1.0) {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p0 + s * d1) - (q0 + t * d2)).norm();
}

}  // namespace optiwb
