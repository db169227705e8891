#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nlos/bvh.hpp"
#include "nlos/mesh.hpp"
#include "nlos/rng.hpp"
#include "nlos/vec.hpp"

namespace nlos {

// Regular grid of confocal scan positions on the relay wall (plane z = 0,
// normal +z into the hidden volume, +y up). Positions sit at cell centers
// of a grid centered on the origin.
struct WallScanGrid {
  double width_m = 0.7, height_m = 0.7;
  int nx = 32, ny = 32;

  int count() const { return nx * ny; }
  Vec3 position(int ix, int iy) const {
    return {-0.5 * width_m + (ix + 0.5) * width_m / nx,
            -0.5 * height_m + (iy + 0.5) * height_m / ny, 0.0};
  }
  std::vector<Vec3> positions() const {
    std::vector<Vec3> out;
    out.reserve(count());
    for (int ix = 0; ix < nx; ++ix)
      for (int iy = 0; iy < ny; ++iy) out.push_back(position(ix, iy));
    return out;
  }
};

enum class Material { kDiffuse, kRetroreflective };

std::string material_name(Material m);
Material material_from_name(const std::string& name);

struct SceneConfig {
  WallScanGrid wall;
  double bin_width_ps = 32.0;
  int n_bins = 256;
  double z_near = 0.35;  // wall-to-hidden-cube distance
  Material material = Material::kDiffuse;
  uint64_t seed = 0;

  // Unit cube holding the hidden scene, x/y centered on the scan area.
  Aabb hidden_cube() const {
    Aabb box;
    box.lo = {-0.5, -0.5, z_near};
    box.hi = {0.5, 0.5, z_near + 1.0};
    return box;
  }

  // Path length covered by the histogram (one-way distance, confocal).
  double histogram_range_m() const;
  // Largest scan-position-to-cube distance. May exceed histogram_range_m()
  // for the shipped presets; the renderer errors only when an actual return
  // lands past the last bin.
  double max_path_m() const;
};

// "confocal-small": 0.70 m x 0.70 m wall, 32x32, 32 ps, cube 0.35 m away.
// "confocal-large": 2 m x 2 m wall, 32x32, 64 ps, cube 0.5 m away.
SceneConfig preset_config(const std::string& name);

// Uniform sampling ranges for random object placement.
struct AffineRanges {
  double scale_min = 0.6, scale_max = 0.85;
  double rot_x_max_deg = 10.0, rot_y_max_deg = 20.0, rot_z_max_deg = 10.0;
  double trans_xy = 0.30, trans_z = 0.40;
};

// One uniform draw from the ranges (no containment check).
AffineTransform sample_placement(Rng& rng, const AffineRanges& ranges);

// Rejection-resamples until the transformed mesh stays inside the canonical
// cube; throws "unplaceable mesh" after max_attempts failures.
AffineTransform sample_placement(Rng& rng, const AffineRanges& ranges, const TriangleMesh& mesh,
                                 int max_attempts = 100);

struct ScenePlacement {
  std::string mesh_id;
  AffineTransform transform;
};

// Persisted scene description; meshes are referenced by id and re-baked on
// load for reproducibility.
struct SceneDescription {
  std::string preset = "confocal-small";
  uint64_t seed = 0;
  std::vector<ScenePlacement> placements;
  // optional overrides, negative/empty = use preset value
  double z_near_override = -1.0;
  std::string material_override;

  SceneConfig config() const;
};

std::string scene_to_json(const SceneDescription& scene);
SceneDescription scene_from_json(const std::string& json_text);
void save_scene(const SceneDescription& scene, const std::string& path);
SceneDescription load_scene(const std::string& path);

// Named collection of unit-cube-normalized source meshes.
class MeshLibrary {
 public:
  void add(const std::string& id, TriangleMesh mesh);  // normalizes
  const TriangleMesh& get(const std::string& id) const;
  bool has(const std::string& id) const { return meshes_.count(id) > 0; }
  std::vector<std::string> ids() const;
  size_t size() const { return meshes_.size(); }

  // Loads every .obj in a directory, ids are the file stems.
  static MeshLibrary from_directory(const std::string& dir);

 private:
  std::map<std::string, TriangleMesh> meshes_;
};

// Union mesh of all placed sources in world coordinates, plus its BVH.
// Throws "empty scene" when there are no placements.
std::pair<TriangleMesh, Bvh> build_scene(const SceneConfig& config,
                                         const std::vector<ScenePlacement>& placements,
                                         const MeshLibrary& library);

// Sensor grid used for occlusion labeling: n x n positions over the scan area.
WallScanGrid sensor_grid(const SceneConfig& config, int n = 5);

}  // namespace nlos
