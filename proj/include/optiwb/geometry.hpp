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

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "optiwb/rigid_transform.hpp"

namespace optiwb {

/// Oriented box: the set pose * [-h, h].
struct Box {
  Vec3 half_extents = Vec3::Ones();
  Transform3d pose;
};

/// Points within `radius` of the segment [a, b]. A == B gives a sphere.
struct Capsule {
  double radius = 0.1;
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
};

/// Convex hull of a vertex cloud, expressed in `pose`.
struct ConvexHull {
  std::vector<Vec3> vertices;
  Transform3d pose;
};

using ConvexVolume = std::variant<Box, Capsule, ConvexHull>;

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();
};

struct Polygon {
  std::vector<Vec2> vertices;
};

/// Row-major raster; cell (ix, iy) covers origin + [ix, ix+1) x [iy, iy+1) * resolution.
struct OccupancyGrid {
  Vec2 origin = Vec2::Zero();
  double resolution = 0.1;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;

  bool occupied(int ix, int iy) const {
    if (ix < 0 || iy < 0 || ix >= width || iy >= height) return false;
    return cells[static_cast<std::size_t>(iy) * width + ix] != 0;
  }
};

using ForbiddenArea = std::variant<Polygon, OccupancyGrid>;

struct Sun {
  double azimuth = 0.0;
  double elevation = std::numbers::pi / 2;
};

/// Empty when valid; otherwise human-readable rule violations.
std::vector<std::string> validate_volume(const ConvexVolume& volume);
std::vector<std::string> validate_polygon(const Polygon& polygon);
std::vector<std::string> validate_grid(const OccupancyGrid& grid);

/// Returns `volume` moved by `transform`.
ConvexVolume transformed(const ConvexVolume& volume, const Transform3d& transform);

/// Farthest point of the volume along `direction` (including capsule radius).
Vec3 support(const ConvexVolume& volume, const Vec3& direction);

/// Center used for bounding and initial search directions.
Vec3 centroid(const ConvexVolume& volume);

/// Radius of a sphere around centroid() containing the volume.
double bounding_radius(const ConvexVolume& volume);

/// Euclidean distance between the closed volumes, 0 when they intersect.
double separation_distance(const ConvexVolume& a, const ConvexVolume& b);

/// Signed clearance: positive distance when separated, non-positive overlap
/// measure when intersecting. Overlap is exact for box/box (smallest SAT
/// overlap) and for capsule pairs with disjoint core segments; otherwise it
/// is a lower bound on the penetration depth.
double clearance(const ConvexVolume& a, const ConvexVolume& b);

/// Closed-set intersection test; touching counts as intersecting.
bool volumes_intersect(const ConvexVolume& a, const ConvexVolume& b);

/// Distance from the ray (s >= 0) to the volume, 0 when they meet.
double ray_distance(const Ray& ray, const ConvexVolume& volume);

bool ray_intersects_volume(const Ray& ray, const ConvexVolume& volume);

/// Boundary counts as inside.
bool point_in_polygon(const Vec2& p, const Polygon& polygon);
bool point_in_grid(const Vec2& p, const OccupancyGrid& grid);
bool point_in_forbidden(const Vec2& p, const std::vector<ForbiddenArea>& areas);

/// Depth of `p` inside the forbidden set (distance to the nearest exit), 0 outside.
double forbidden_depth(const Vec2& p, const std::vector<ForbiddenArea>& areas);

/// Unit vector from the target toward the sun.
Vec3 sun_direction(const Sun& sun);

/// Closest points between segments [p0, p1] and [q0, q1]; returns the distance.
double segment_segment_distance(const Vec3& p0, const Vec3& p1, const Vec3& q0, const Vec3& q1);

double point_segment_distance_2d(const Vec2& p, const Vec2& a, const Vec2& b);

}  // namespace optiwb
