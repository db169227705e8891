#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlos/bvh.hpp"
#include "nlos/mesh.hpp"
#include "nlos/scene.hpp"

namespace nlos {

inline constexpr double kSpeedOfLightMs = 299792458.0;

// Confocal transient measurement m(s_i, tau): one time histogram per scan
// position, stored (x, y, t) with t contiguous. Radiometric scale is
// arbitrary but internally consistent.
struct TransientVolume {
  int nx = 0, ny = 0, n_bins = 0;
  double bin_width_ps = 0.0;
  double wall_width_m = 0.0, wall_height_m = 0.0;
  Material material = Material::kDiffuse;
  std::vector<double> data;

  double& at(int ix, int iy, int it) {
    return data[(static_cast<size_t>(ix) * ny + iy) * n_bins + it];
  }
  double at(int ix, int iy, int it) const {
    return data[(static_cast<size_t>(ix) * ny + iy) * n_bins + it];
  }
  size_t size() const { return data.size(); }
  double total() const;
  double peak() const;
  bool finite_nonnegative() const;
};

// Raw little-endian float32 plus a JSON sidecar at <path>.json.
void save_transient(const TransientVolume& volume, const std::string& path);
TransientVolume load_transient(const std::string& path);

struct RenderOptions {
  int samples_per_triangle = 4;  // stratified barycentric
  bool two_bin_split = false;    // linear temporal split instead of nearest bin
};

// Renders third-bounce confocal returns: for every surface sample visible
// from a scan position, deposits albedo * cos^j(n, w) / |s - p|^l * dA into
// the bin nearest to 2|s - p| / c. (j, l) is (2, 4) for diffuse and (4, 2)
// for retroreflective targets. Throws "histogram too short" when a return
// lands past the last bin.
TransientVolume render(const TriangleMesh& mesh, const Bvh& bvh, const SceneConfig& config,
                       const RenderOptions& options = {});

}  // namespace nlos
