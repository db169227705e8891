#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "nlos/bvh.hpp"
#include "nlos/mesh.hpp"
#include "nlos/rng.hpp"
#include "nlos/scene.hpp"

namespace nlos::testing {

// Places a normalized source mesh into world coordinates the same way
// build_scene does: canonical-cube transform, then shift into the hidden cube.
inline TriangleMesh place_in_world(const TriangleMesh& normalized, const AffineTransform& xf,
                                   const SceneConfig& config) {
  TriangleMesh placed = apply_transform_unchecked(normalized, xf);
  Vec3 shift = config.hidden_cube().center();
  for (Vec3& v : placed.vertices) v += shift;
  return placed;
}

// Default depth puts the plate near the cube front so all returns fit the
// 32 ps histogram of the small preset.
inline TriangleMesh plate_world(const SceneConfig& config, double scale = 0.7,
                                int tessellation = 8, double t_z = -0.4) {
  AffineTransform xf;
  xf.scale = scale;
  xf.translation = {0.0, 0.0, t_z};
  return place_in_world(make_plate(tessellation), xf, config);
}

// --- independent oracles ---------------------------------------------------

// Exhaustive all-triangles scan with the same epsilon window as the queries.
inline bool brute_force_any_hit(const TriangleMesh& mesh, const Ray& ray) {
  double t_hi = ray.t_max - kRayEpsilon;
  for (uint32_t t = 0; t < mesh.triangle_count(); ++t) {
    Vec3 v0 = mesh.vertex(t, 0);
    auto hit = intersect_triangle(v0, mesh.vertex(t, 1) - v0, mesh.vertex(t, 2) - v0, ray);
    if (hit && hit->t > kRayEpsilon && hit->t < t_hi) return true;
  }
  return false;
}

inline std::optional<Hit> brute_force_closest_hit(const TriangleMesh& mesh, const Ray& ray) {
  double t_hi = ray.t_max - kRayEpsilon;
  std::optional<Hit> best;
  for (uint32_t t = 0; t < mesh.triangle_count(); ++t) {
    Vec3 v0 = mesh.vertex(t, 0);
    auto hit = intersect_triangle(v0, mesh.vertex(t, 1) - v0, mesh.vertex(t, 2) - v0, ray);
    if (hit && hit->t > kRayEpsilon && hit->t < t_hi && (!best || hit->t < best->t)) {
      best = *hit;
      best->triangle = t;
    }
  }
  return best;
}

inline bool brute_force_segment_occluded(const TriangleMesh& mesh, const Vec3& a, const Vec3& b) {
  Vec3 d = b - a;
  double dist = length(d);
  if (dist <= kRayEpsilon) return false;
  Ray ray{a, d / dist, dist - kRayEpsilon};
  return brute_force_any_hit(mesh, ray);
}

// Analytic ray-sphere: does the open segment a->b cross the sphere?
inline bool segment_hits_sphere(const Vec3& a, const Vec3& b, const Vec3& center, double radius) {
  Vec3 d = b - a;
  double len = length(d);
  Vec3 dir = d / len;
  Vec3 oc = a - center;
  double half_b = dot(oc, dir);
  double c = length_sq(oc) - radius * radius;
  double disc = half_b * half_b - c;
  if (disc < 0.0) return false;
  double sq = std::sqrt(disc);
  double t0 = -half_b - sq, t1 = -half_b + sq;
  return (t0 > 0.0 && t0 < len) || (t1 > 0.0 && t1 < len);
}

// Uniform random point inside a box.
inline Vec3 random_in(const Aabb& box, Rng& rng) {
  return {rng.uniform(box.lo.x, box.hi.x), rng.uniform(box.lo.y, box.hi.y),
          rng.uniform(box.lo.z, box.hi.z)};
}

inline Vec3 random_unit(Rng& rng) {
  for (;;) {
    Vec3 v{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    double l2 = length_sq(v);
    if (l2 > 1e-6 && l2 <= 1.0) return v / std::sqrt(l2);
  }
}

}  // namespace nlos::testing
