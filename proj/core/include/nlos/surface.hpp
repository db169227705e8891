#pragma once

#include <cstdint>
#include <vector>

#include "nlos/bvh.hpp"
#include "nlos/field.hpp"
#include "nlos/mesh.hpp"
#include "nlos/scene.hpp"
#include "nlos/vec.hpp"

namespace nlos {

// Dense occlusion samples at cell centers of an r^3 grid over the cube.
struct FieldGrid {
  int resolution = 64;
  Aabb cube;
  std::vector<double> values;  // (x * r + y) * r + z

  double cell_size() const { return cube.extent().x / resolution; }
  double& at(int i, int j, int k) {
    return values[(static_cast<size_t>(i) * resolution + j) * resolution + k];
  }
  double at(int i, int j, int k) const {
    return values[(static_cast<size_t>(i) * resolution + j) * resolution + k];
  }
  Vec3 cell_center(int i, int j, int k) const {
    double h = 1.0 / resolution;
    Vec3 e = cube.extent();
    return {cube.lo.x + (i + 0.5) * h * e.x, cube.lo.y + (j + 0.5) * h * e.y,
            cube.lo.z + (k + 0.5) * h * e.z};
  }
};

// Field probabilities at cell centers.
FieldGrid evaluate_grid(const OcclusionField& field, const TransientVolume* transient,
                        int resolution);

// Hard oracle labels (k-of-N against the ground-truth geometry). A null bvh
// is an empty scene: every cell visible.
FieldGrid evaluate_grid_oracle(const Bvh* bvh, const std::vector<Vec3>& sensors, int k,
                               const Aabb& cube, int resolution);

// Standard 256-case marching cubes at the given iso level, with linear edge
// interpolation. The grid is padded with one layer of zero cells so hulls
// close at the cube faces. Triangles are oriented with normals pointing out
// of the occupied (value > iso) region.
TriangleMesh marching_cubes(const FieldGrid& grid, double iso = 0.5);

struct ExtractedSurface {
  TriangleMesh closed_mesh;
  TriangleMesh nlos_mesh;          // wall-visible subset
  std::vector<uint8_t> is_nlos;    // per closed-mesh triangle
};

// Splits the closed hull into the open NLoS surface and the shadow-hull
// remainder: a triangle is kept when its centroid, offset by epsilon along
// the outward normal, is globally visible w.r.t. the hull itself.
ExtractedSurface segment_nlos_surface(const TriangleMesh& closed_mesh,
                                      const std::vector<Vec3>& sensors, int k,
                                      double epsilon);

// Specular-recoverability baseline: keeps a triangle iff the ray from its
// centroid along its normal reaches the scanned wall rectangle without being
// blocked by the mesh.
TriangleMesh fermat_filter(const TriangleMesh& mesh, const WallScanGrid& wall);

}  // namespace nlos
