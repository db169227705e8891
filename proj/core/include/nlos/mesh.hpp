#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nlos/vec.hpp"

namespace nlos {

// Indexed triangle geometry with a per-triangle scalar albedo.
// Meshes are open surfaces; occlusion queries treat triangles as two-sided.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<uint32_t, 3>> triangles;
  std::vector<double> albedo;  // one entry per triangle, default 1.0

  size_t triangle_count() const { return triangles.size(); }
  bool empty() const { return triangles.empty(); }

  Vec3 vertex(uint32_t tri, int corner) const { return vertices[triangles[tri][corner]]; }

  // Unnormalized normal (counter-clockwise winding), twice the triangle area.
  Vec3 face_vector(uint32_t tri) const {
    const auto& t = triangles[tri];
    return cross(vertices[t[1]] - vertices[t[0]], vertices[t[2]] - vertices[t[0]]);
  }
  Vec3 normal(uint32_t tri) const { return normalized(face_vector(tri)); }
  double area(uint32_t tri) const { return 0.5 * length(face_vector(tri)); }
  Vec3 centroid(uint32_t tri) const {
    const auto& t = triangles[tri];
    return (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]) / 3.0;
  }

  double total_area() const;
  Aabb bounds() const;

  // Drops zero-area triangles and validates indices. Throws on out-of-range
  // indices. Called by the loaders.
  void cleanup(double area_eps = 1e-14);

  // Appends another mesh (indices re-based), keeping each part's albedo.
  void merge(const TriangleMesh& other);

  // Uniformly rescales and recenters so the bounding box is centered at the
  // origin with its longest side equal to 1.
  void normalize_unit_cube();
};

// Scale -> rotate (Euler X, then Y, then Z, degrees) -> translate.
struct AffineTransform {
  double scale = 1.0;
  Vec3 rotation_deg{0.0, 0.0, 0.0};
  Vec3 translation{0.0, 0.0, 0.0};

  Vec3 apply(const Vec3& p) const;
};

// Transforms every vertex. The input is expected to be unit-cube normalized
// and centered; throws "out of scene bounds" if the result leaves the
// canonical cube [-0.5, 0.5]^3 (callers resample the transform).
TriangleMesh apply_transform(const TriangleMesh& mesh, const AffineTransform& xf);

// As above but without the containment check (used for fixtures).
TriangleMesh apply_transform_unchecked(const TriangleMesh& mesh, const AffineTransform& xf);

// Procedural fixture meshes, all unit-cube normalized and centered at the
// origin with normals facing -z (toward the wall once placed).
TriangleMesh make_plate(int tessellation = 8);
TriangleMesh make_box(double depth = 1.0);
TriangleMesh make_sphere(int subdivisions = 3);
TriangleMesh make_letter(char letter, int cells_per_unit = 20);

}  // namespace nlos
