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

#include <random>

#include <gtest/gtest.h>

#include "optiwb/geometry.hpp"
#include "oracles.hpp"

namespace optiwb {
namespace {

TEST(Geometry, ConvexPairsMatchSamplingOracle) {
  std::mt19937_64 rng(11);
  int decided = 0, hits = 0, misses = 0, disagreements = 0;
  while (decided < 120) {
    const auto [sa, va] = oracle::random_solid(rng, 0.8);
    const auto [sb, vb] = oracle::random_solid(rng, 0.8);
    const oracle::Verdict verdict = oracle::sampled_intersection(sa, sb, rng);
    if (verdict == oracle::Verdict::kUndecided) continue;
    ++decided;
    const bool expected = verdict == oracle::Verdict::kIntersect;
    (expected ? hits : misses)++;
    if (volumes_intersect(va, vb) != expected) ++disagreements;
    if (separation_distance(va, vb) > 0.0 == expected) ++disagreements;
  }
  EXPECT_EQ(disagreements, 0);
  EXPECT_GT(hits, 20);
  EXPECT_GT(misses, 20);
}

TEST(Geometry, BoxBoxClearanceIsSignedSatOverlap) {
  const Box a{Vec3(1, 1, 1), Transform3d()};
  const Box b{Vec3(1, 1, 1), Transform3d::FromTranslation(Vec3(1.5, 0.2, 0))};
  EXPECT_NEAR(clearance(a, b), -0.5, 1e-9);
  const Box c{Vec3(1, 1, 1), Transform3d::FromTranslation(Vec3(2.5, 0, 0))};
  EXPECT_NEAR(clearance(a, c), 0.5, 1e-9);
  EXPECT_NEAR(separation_distance(a, c), 0.5, 1e-9);
}

TEST(Geometry, CapsuleDistanceIsSegmentDistanceMinusRadii) {
  const Capsule a{0.1, Vec3(0, 0, 0), Vec3(1, 0, 0)};
  const Capsule b{0.2, Vec3(0.5, 1, -1), Vec3(0.5, 1, 1)};
  EXPECT_NEAR(separation_distance(a, b), 0.7, 1e-9);
  EXPECT_NEAR(segment_segment_distance(a.a, a.b, b.a, b.b), 1.0, 1e-12);
}

TEST(Geometry, TouchingCountsAsIntersecting) {
  const Box a{Vec3(1, 1, 1), Transform3d()};
  const Capsule s{0.5, Vec3(1.5, 0, 0), Vec3(1.5, 0, 0)};
  EXPECT_TRUE(volumes_intersect(a, s));
}

TEST(Geometry, PointInPolygonMatchesWindingNumber) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int disagreements = 0;
  for (int trial = 0; trial < 20; ++trial) {
    // Star-shaped, so usually non-convex.
    Polygon poly;
    const int n = 5 + trial % 7;
    for (int k = 0; k < n; ++k) {
      const double a = 2 * std::numbers::pi * k / n;
      const double r = 0.3 + 0.7 * (0.5 + 0.5 * u(rng));
      poly.vertices.emplace_back(r * std::cos(a), r * std::sin(a));
    }
    for (int k = 0; k < 100; ++k) {
      const Vec2 p(u(rng), u(rng));
      if (point_in_polygon(p, poly) != (oracle::winding_number(p, poly.vertices) != 0)) ++disagreements;
    }
  }
  EXPECT_EQ(disagreements, 0);
}

TEST(Geometry, PolygonBoundaryIsInside) {
  const Polygon square{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  EXPECT_TRUE(point_in_polygon(Vec2(0.5, 0.0), square));
  EXPECT_TRUE(point_in_polygon(Vec2(1.0, 1.0), square));
  EXPECT_FALSE(point_in_polygon(Vec2(1.0 + 1e-9, 0.5), square));
  EXPECT_NEAR(forbidden_depth(Vec2(0.5, 0.4), {square}), 0.4, 1e-12);
  EXPECT_EQ(forbidden_depth(Vec2(2.0, 0.4), {square}), 0.0);
}

TEST(Geometry, GridCellsCoverHalfOpenSquares) {
  OccupancyGrid g;
  g.origin = Vec2(1.0, 2.0);
  g.resolution = 0.5;
  g.width = 2;
  g.height = 2;
  g.cells = {0, 1, 0, 0};
  EXPECT_TRUE(point_in_grid(Vec2(1.6, 2.1), g));
  EXPECT_FALSE(point_in_grid(Vec2(1.4, 2.1), g));
  EXPECT_FALSE(point_in_grid(Vec2(1.6, 2.6), g));
  EXPECT_FALSE(point_in_grid(Vec2(0.0, 0.0), g));
}

TEST(Geometry, RayBoxMatchesSlabOracle) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::uniform_real_distribution<double> size(0.1, 1.0);
  int disagreements = 0, hits = 0;
  for (int k = 0; k < 1000; ++k) {
    const Box box{Vec3(size(rng), size(rng), size(rng)),
                  Transform3d(Quat(oracle::random_rotation(rng)), Vec3(u(rng), u(rng), u(rng)))};
    Ray ray{Vec3(u(rng), u(rng), u(rng)), oracle::unit_vector(rng)};
    // Half the rays aim near the box so both outcomes are common.
    if (k % 2 == 0) ray.direction = (box.pose.translation + 0.8 * ray.direction - ray.origin).normalized();
    const bool expected = oracle::ray_hits_box(ray.origin, ray.direction, box);
    hits += expected;
    if (ray_intersects_volume(ray, box) != expected) ++disagreements;
  }
  EXPECT_EQ(disagreements, 0);
  EXPECT_GT(hits, 200);
  EXPECT_LT(hits, 800);
}

TEST(Geometry, RayStartsAtOrigin) {
  const Capsule ball{0.5, Vec3(0, 0, -2), Vec3(0, 0, -2)};
  EXPECT_FALSE(ray_intersects_volume(Ray{Vec3::Zero(), Vec3::UnitZ()}, ball));
  EXPECT_TRUE(ray_intersects_volume(Ray{Vec3::Zero(), -Vec3::UnitZ()}, ball));
  EXPECT_NEAR(ray_distance(Ray{Vec3::Zero(), Vec3::UnitZ()}, ball), 1.5, 1e-9);
}

TEST(Geometry, SunDirection) {
  EXPECT_NEAR((sun_direction(Sun{0.0, std::numbers::pi / 2}) - Vec3::UnitZ()).norm(), 0.0, 1e-12);
  EXPECT_NEAR((sun_direction(Sun{std::numbers::pi / 2, 0.0}) - Vec3::UnitY()).norm(), 0.0, 1e-12);
}

TEST(Geometry, Validation) {
  EXPECT_FALSE(validate_volume(Box{Vec3(1, 0, 1), {}}).empty());
  EXPECT_FALSE(validate_volume(Capsule{0.0, Vec3::Zero(), Vec3::UnitX()}).empty());
  ConvexHull flat;
  flat.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(1, 1, 0)};
  EXPECT_FALSE(validate_volume(flat).empty());
  EXPECT_FALSE(validate_polygon(Polygon{{{0, 0}, {1, 0}}}).empty());
  // Self-intersecting bow tie.
  EXPECT_FALSE(validate_polygon(Polygon{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}}).empty());
  EXPECT_TRUE(validate_polygon(Polygon{{{0, 0}, {1, 0}, {0, 1}}}).empty());
}

TEST(Geometry, TransformedMovesSupport) {
  const Box box{Vec3(1, 2, 3), Transform3d()};
  const ConvexVolume moved = transformed(box, planar_transform(1.0, 0.0, std::numbers::pi / 2));
  const Vec3 s = support(moved, Vec3(1, 1, 1));
  EXPECT_NEAR((s - Vec3(3, 1, 3)).norm(), 0.0, 1e-12);
}

}  // namespace
}  // namespace optiwb
