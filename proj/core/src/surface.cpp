#include "nlos/surface.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "nlos/mc_tables.hpp"
#include "nlos/threading.hpp"

namespace nlos {

FieldGrid evaluate_grid(const OcclusionField& field, const TransientVolume* transient,
                        int resolution) {
  if (resolution < 8) throw std::invalid_argument("grid resolution must be at least 8");
  FieldGrid grid;
  grid.resolution = resolution;
  grid.cube = field.config().domain;

  std::vector<Vec3> centers;
  centers.reserve(static_cast<size_t>(resolution) * resolution * resolution);
  for (int i = 0; i < resolution; ++i)
    for (int j = 0; j < resolution; ++j)
      for (int k = 0; k < resolution; ++k) centers.push_back(grid.cell_center(i, j, k));

  grid.values = field.forward(centers, transient);
  return grid;
}

FieldGrid evaluate_grid_oracle(const Bvh* bvh, const std::vector<Vec3>& sensors, int k,
                               const Aabb& cube, int resolution) {
  if (resolution < 8) throw std::invalid_argument("grid resolution must be at least 8");
  FieldGrid grid;
  grid.resolution = resolution;
  grid.cube = cube;
  size_t n = static_cast<size_t>(resolution) * resolution * resolution;
  grid.values.assign(n, 0.0);
  if (bvh == nullptr) return grid;

  parallel_for(static_cast<int64_t>(n), [&](int64_t lo, int64_t hi) {
    for (int64_t idx = lo; idx < hi; ++idx) {
      int i = static_cast<int>(idx / (static_cast<int64_t>(resolution) * resolution));
      int j = static_cast<int>((idx / resolution) % resolution);
      int kk = static_cast<int>(idx % resolution);
      grid.values[idx] =
          global_occlusion(*bvh, grid.cell_center(i, j, kk), sensors, k) ? 1.0 : 0.0;
    }
  });
  return grid;
}

namespace {

// Padded lattice access: one layer of zero samples around the grid so the
// isosurface closes at the cube boundary.
struct PaddedGrid {
  const FieldGrid* grid;
  int n;  // lattice points per axis = resolution + 2

  double value(int i, int j, int k) const {
    int r = grid->resolution;
    if (i < 1 || j < 1 || k < 1 || i > r || j > r || k > r) return 0.0;
    return grid->at(i - 1, j - 1, k - 1);
  }
  Vec3 position(int i, int j, int k) const {
    double h = grid->cell_size();
    Vec3 e = grid->cube.extent();
    double hy = e.y / grid->resolution, hz = e.z / grid->resolution;
    return {grid->cube.lo.x + (i - 0.5) * h, grid->cube.lo.y + (j - 0.5) * hy,
            grid->cube.lo.z + (k - 0.5) * hz};
  }
  uint64_t corner_id(int i, int j, int k) const {
    return (static_cast<uint64_t>(i) * n + j) * n + k;
  }
};

}  // namespace

TriangleMesh marching_cubes(const FieldGrid& grid, double iso) {
  for (double v : grid.values) {
    if (!std::isfinite(v)) throw std::invalid_argument("grid contains non-finite values");
  }
  PaddedGrid lattice{&grid, grid.resolution + 2};

  // corner offsets in the cube-local frame
  static const int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                                    {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
  static const int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                                   {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

  TriangleMesh mesh;
  std::unordered_map<uint64_t, uint32_t> edge_vertex;
  edge_vertex.reserve(1 << 16);

  const int cells = lattice.n - 1;
  double corner_value[8];
  uint64_t corner_key[8];
  Vec3 corner_pos[8];
  uint32_t edge_to_vertex[12];

  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      for (int k = 0; k < cells; ++k) {
        int cube_index = 0;
        for (int c = 0; c < 8; ++c) {
          int ci = i + kCorner[c][0], cj = j + kCorner[c][1], ck = k + kCorner[c][2];
          corner_value[c] = lattice.value(ci, cj, ck);
          if (corner_value[c] < iso) cube_index |= 1 << c;
        }
        int edge_mask = kMcEdgeTable[cube_index];
        if (edge_mask == 0) continue;
        for (int c = 0; c < 8; ++c) {
          int ci = i + kCorner[c][0], cj = j + kCorner[c][1], ck = k + kCorner[c][2];
          corner_key[c] = lattice.corner_id(ci, cj, ck);
          corner_pos[c] = lattice.position(ci, cj, ck);
        }
        for (int e = 0; e < 12; ++e) {
          if (!(edge_mask & (1 << e))) continue;
          int a = kEdge[e][0], b = kEdge[e][1];
          uint64_t ka = corner_key[a], kb = corner_key[b];
          uint64_t total = static_cast<uint64_t>(lattice.n) * lattice.n * lattice.n;
          uint64_t key = ka < kb ? ka * total + kb : kb * total + ka;
          auto it = edge_vertex.find(key);
          if (it == edge_vertex.end()) {
            double va = corner_value[a], vb = corner_value[b];
            double t = std::abs(vb - va) > 1e-300 ? (iso - va) / (vb - va) : 0.5;
            Vec3 p = corner_pos[a] + t * (corner_pos[b] - corner_pos[a]);
            uint32_t idx = static_cast<uint32_t>(mesh.vertices.size());
            mesh.vertices.push_back(p);
            it = edge_vertex.emplace(key, idx).first;
          }
          edge_to_vertex[e] = it->second;
        }
        const int* tri = kMcTriTable[cube_index];
        for (int t = 0; tri[t] != -1; t += 3) {
          uint32_t a = edge_to_vertex[tri[t]];
          uint32_t b = edge_to_vertex[tri[t + 1]];
          uint32_t c = edge_to_vertex[tri[t + 2]];
          if (a == b || b == c || a == c) continue;  // table degeneracies
          mesh.triangles.push_back({a, b, c});
        }
      }
    }
  }
  mesh.albedo.assign(mesh.triangles.size(), 1.0);
  mesh.cleanup();
  return mesh;
}

ExtractedSurface segment_nlos_surface(const TriangleMesh& closed_mesh,
                                      const std::vector<Vec3>& sensors, int k, double epsilon) {
  ExtractedSurface out;
  out.closed_mesh = closed_mesh;
  out.is_nlos.assign(closed_mesh.triangle_count(), 0);
  if (closed_mesh.empty()) return out;

  Bvh bvh = build_bvh(closed_mesh);
  parallel_for(static_cast<int64_t>(closed_mesh.triangle_count()), [&](int64_t lo, int64_t hi) {
    for (int64_t t = lo; t < hi; ++t) {
      // probe sits just off the face along its wall-facing normal; back faces
      // flip inward so the hull itself blocks them. epsilon only needs to
      // clear the ray self-hit window, not the voxel size: lateral shadow
      // faces must stay close enough to the hull that their grazing-sensor
      // rays still clip it.
      Vec3 n = closed_mesh.normal(static_cast<uint32_t>(t));
      if (n.z > 0.0) n = -n;
      Vec3 probe = closed_mesh.centroid(static_cast<uint32_t>(t)) + epsilon * n;
      if (!global_occlusion(bvh, probe, sensors, k)) {
        out.is_nlos[t] = 1;
      }
    }
  });

  // compact the kept subset into its own mesh, reusing the vertex buffer
  out.nlos_mesh.vertices = closed_mesh.vertices;
  for (uint32_t t = 0; t < closed_mesh.triangle_count(); ++t) {
    if (out.is_nlos[t]) {
      out.nlos_mesh.triangles.push_back(closed_mesh.triangles[t]);
      out.nlos_mesh.albedo.push_back(closed_mesh.albedo[t]);
    }
  }
  return out;
}

TriangleMesh fermat_filter(const TriangleMesh& mesh, const WallScanGrid& wall) {
  TriangleMesh out;
  out.vertices = mesh.vertices;
  if (mesh.empty()) return out;
  Bvh bvh = build_bvh(mesh);

  for (uint32_t t = 0; t < mesh.triangle_count(); ++t) {
    Vec3 n = mesh.normal(t);
    if (n.z >= 0.0) continue;  // normal ray never reaches the wall plane
    Vec3 c = mesh.centroid(t);
    double t_wall = -c.z / n.z;
    Vec3 hit = c + t_wall * n;
    if (std::abs(hit.x) > 0.5 * wall.width_m || std::abs(hit.y) > 0.5 * wall.height_m) {
      continue;  // points outside the scanned aperture
    }
    Ray ray{c, n, t_wall};
    if (bvh.any_hit(ray)) continue;  // blocked by the mesh itself
    out.triangles.push_back(mesh.triangles[t]);
    out.albedo.push_back(mesh.albedo[t]);
  }
  return out;
}

}  // namespace nlos
