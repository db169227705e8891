#include <cmath>

#include "doctest.h"
#include "nlos/bvh.hpp"
#include "nlos/mesh.hpp"
#include "support/fixtures.hpp"

using namespace nlos;
using namespace nlos::testing;

namespace {

TriangleMesh dense_plate(int tess) { return make_plate(tess); }

TriangleMesh world_sphere(const Vec3& center, double radius, int subdiv) {
  TriangleMesh sphere = make_sphere(subdiv);
  for (Vec3& v : sphere.vertices) v = v * (2.0 * radius) + center;
  return sphere;
}

}  // namespace

TEST_CASE("empty mesh is rejected") {
  TriangleMesh empty;
  CHECK_THROWS_WITH_AS(build_bvh(empty), "empty geometry", std::invalid_argument);
}

TEST_CASE("single-triangle BVH matches the direct triangle test") {
  TriangleMesh mesh;
  mesh.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
  mesh.triangles = {{0, 1, 2}};
  mesh.albedo = {1.0};
  Bvh bvh = build_bvh(mesh);
  CHECK(bvh.nodes().size() == 1);

  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    Ray ray{random_in({{-1, -1, -1}, {2, 2, 2}}, rng), random_unit(rng), 10.0};
    CHECK(bvh.any_hit(ray) == brute_force_any_hit(mesh, ray));
  }
}

TEST_CASE("root AABB of two disjoint boxes is the union of their AABBs") {
  TriangleMesh a = make_box();
  TriangleMesh b = make_box();
  for (Vec3& v : b.vertices) v += Vec3{3.0, 0.5, -1.0};
  TriangleMesh both = a;
  both.merge(b);
  Bvh bvh = build_bvh(both);
  Aabb expect = a.bounds();
  expect.grow(b.bounds());
  const Aabb& root = bvh.nodes()[0].box;
  CHECK(length(root.lo - expect.lo) < 1e-12);
  CHECK(length(root.hi - expect.hi) < 1e-12);
}

TEST_CASE("any_hit basics against a unit quad") {
  TriangleMesh quad = make_plate(1);  // z = 0 plane
  Bvh bvh = build_bvh(quad);

  Ray through{{0.1, 0.1, -1.0}, {0.0, 0.0, 1.0}, 10.0};
  CHECK(bvh.any_hit(through));

  Ray parallel{{0.0, 0.0, 0.5}, {1.0, 0.0, 0.0}, 10.0};
  CHECK(!bvh.any_hit(parallel));

  // backface hits count: occluders are two-sided
  Ray from_behind{{0.1, 0.1, 1.0}, {0.0, 0.0, -1.0}, 10.0};
  CHECK(bvh.any_hit(from_behind));
}

TEST_CASE("any_hit agrees with brute force on a 30k-triangle mesh") {
  TriangleMesh mesh = dense_plate(123);  // 30258 triangles
  AffineTransform tilt;
  tilt.rotation_deg = {25.0, 40.0, 10.0};
  mesh = apply_transform_unchecked(mesh, tilt);
  REQUIRE(mesh.triangle_count() > 30000);
  Bvh bvh = build_bvh(mesh);

  Rng rng(11);
  Aabb region{{-1, -1, -1}, {1, 1, 1}};
  int hits = 0;
  for (int i = 0; i < 1000; ++i) {
    Ray ray{random_in(region, rng), random_unit(rng), rng.uniform(0.5, 4.0)};
    bool got = bvh.any_hit(ray);
    hits += got;
    REQUIRE(got == brute_force_any_hit(mesh, ray));
  }
  CHECK(hits > 50);  // the sweep actually exercises both outcomes
}

TEST_CASE("closest_hit returns the nearer of two stacked quads") {
  TriangleMesh near = make_plate(1);
  TriangleMesh far = make_plate(1);
  for (Vec3& v : far.vertices) v.z = 0.5;
  TriangleMesh both = near;
  both.merge(far);
  Bvh bvh = build_bvh(both);

  Ray ray{{0.0, 0.0, -1.0}, {0.0, 0.0, 1.0}, 10.0};
  auto hit = bvh.closest_hit(ray);
  REQUIRE(hit.has_value());
  CHECK(hit->t == doctest::Approx(1.0));
  CHECK(hit->triangle < 2);  // one of the near-plate triangles

  Ray miss{{5.0, 5.0, -1.0}, {0.0, 0.0, 1.0}, 10.0};
  CHECK(!bvh.closest_hit(miss).has_value());
}

TEST_CASE("closest_hit matches brute force exactly") {
  TriangleMesh mesh = world_sphere({0.1, -0.2, 0.3}, 0.4, 3);
  Bvh bvh = build_bvh(mesh);
  Rng rng(13);
  Aabb region{{-1, -1, -1}, {1, 1, 1}};
  int found = 0;
  for (int i = 0; i < 2000; ++i) {
    Ray ray{random_in(region, rng), random_unit(rng), 5.0};
    auto got = bvh.closest_hit(ray);
    auto expect = brute_force_closest_hit(mesh, ray);
    REQUIRE(got.has_value() == expect.has_value());
    if (got) {
      ++found;
      CHECK(got->t == doctest::Approx(expect->t).epsilon(1e-6));
      CHECK(got->triangle == expect->triangle);
    }
  }
  CHECK(found > 100);
}

TEST_CASE("10k random rays against a sphere match the analytic test") {
  const Vec3 center{0.0, 0.0, 0.85};
  const double radius = 0.3;
  TriangleMesh mesh = world_sphere(center, radius, 5);
  Bvh bvh = build_bvh(mesh);

  Rng rng(17);
  Aabb region{{-1.0, -1.0, -0.5}, {1.0, 1.0, 2.0}};
  int agree = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    Vec3 a = random_in(region, rng);
    Vec3 b = random_in(region, rng);
    bool analytic = segment_hits_sphere(a, b, center, radius);
    bool traced = segment_occluded(bvh, a, b);
    agree += analytic == traced;
  }
  // tessellation error only
  CHECK(static_cast<double>(agree) / n >= 0.999);
}

TEST_CASE("axis-aligned rays along grid lines do not slip between AABBs") {
  TriangleMesh plate = make_plate(8);
  AffineTransform up;
  up.rotation_deg = {90.0, 0.0, 0.0};  // plate now in the xz plane
  plate = apply_transform_unchecked(plate, up);
  Bvh bvh = build_bvh(plate);

  // rays along y hitting exactly on tessellation grid lines
  for (int i = 0; i <= 8; ++i) {
    double x = -0.5 + i / 8.0;
    for (int j = 0; j <= 8; ++j) {
      double z = -0.5 + j / 8.0;
      Ray ray{{x, -1.0, z}, {0.0, 1.0, 0.0}, 10.0};
      CHECK(bvh.any_hit(ray) == brute_force_any_hit(plate, ray));
    }
  }
}

TEST_CASE("BVH structure invariants hold") {
  TriangleMesh mesh = world_sphere({0, 0, 0}, 0.5, 4);
  Bvh bvh = build_bvh(mesh);
  const auto& nodes = bvh.nodes();

  std::vector<int> seen(bvh.triangle_count(), 0);
  for (size_t i = 0; i < nodes.size(); ++i) {
    const auto& node = nodes[i];
    if (node.is_leaf()) {
      CHECK(node.count <= Bvh::kLeafSize);
      for (uint32_t p = node.left_first; p < node.left_first + node.count; ++p) seen[p] += 1;
    } else {
      const Aabb& left = nodes[i + 1].box;
      const Aabb& right = nodes[node.left_first].box;
      CHECK(node.box.contains(left));
      CHECK(node.box.contains(right));
    }
  }
  for (int count : seen) CHECK(count == 1);
}
