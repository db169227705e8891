#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlos/bvh.hpp"
#include "nlos/mesh.hpp"
#include "nlos/rng.hpp"
#include "nlos/vec.hpp"

namespace nlos {

// Local occlusion bit: 1 iff the open segment from p to the scan position is
// blocked by the target.
inline bool local_occlusion(const Bvh& bvh, const Vec3& p, const Vec3& sensor) {
  return segment_occluded(bvh, p, sensor);
}

// Global occlusion under the k-of-N relaxation: a point is visible when at
// least k sensors see it, i.e. occluded iff more than N - k bits are set.
// k = 1 reduces to the product over all sensors. Throws when k is outside
// [1, N].
bool global_occlusion(const Bvh& bvh, const Vec3& p, const std::vector<Vec3>& sensors, int k = 1);

// Training points: a fraction sampled area-uniformly on the surface with an
// isotropic Gaussian offset (per-point variance uniform in var_range),
// clamped to the cube; the rest uniform over the cube.
std::vector<Vec3> sample_points(const TriangleMesh& mesh, const Aabb& cube, size_t n_total,
                                double surface_fraction, double var_min, double var_max, Rng& rng);

inline std::vector<Vec3> sample_points(const TriangleMesh& mesh, const Aabb& cube, size_t n_total,
                                       Rng& rng) {
  return sample_points(mesh, cube, n_total, 0.7, 0.001, 0.005, rng);
}

// Labeled point set: per-sensor visibility bits (1 = occluded) packed to
// ceil(N/8) bytes per point, plus the k-of-N global label.
struct OcclusionSampleSet {
  std::vector<Vec3> points;
  std::vector<uint8_t> global_label;  // 1 = occluded
  std::vector<uint8_t> sensor_bits;   // packed, stride() bytes per point
  size_t n_sensors = 0;
  int k = 1;

  size_t count() const { return points.size(); }
  size_t stride() const { return (n_sensors + 7) / 8; }
  bool sensor_bit(size_t point, size_t sensor) const {
    return (sensor_bits[point * stride() + sensor / 8] >> (sensor % 8)) & 1u;
  }
  size_t occluded_count(size_t point) const;
  void validate() const;  // label/bit consistency, sizes
};

// Labels every point against every sensor. bvh == nullptr means an empty
// scene (all bits clear). Output order matches the input point order.
OcclusionSampleSet label_set(const Bvh* bvh, const std::vector<Vec3>& points,
                             const std::vector<Vec3>& sensors, int k = 1);

// Binary records (x y z float32, global label u8, packed bits) with a JSON
// sidecar at <path>.json.
void save_samples(const OcclusionSampleSet& set, const std::string& path);
OcclusionSampleSet load_samples(const std::string& path);

}  // namespace nlos
