#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nlos/mesh.hpp"
#include "nlos/vec.hpp"

namespace nlos {

// Area-uniform surface samples; identical (mesh, n, seed) give identical
// point sets, which is what makes the self-distance fixtures exact.
std::vector<Vec3> sample_mesh_points(const TriangleMesh& mesh, size_t n, uint64_t seed);

// Symmetric Chamfer: mean of the two directional means of squared
// nearest-neighbor distances between area-uniform sample sets (n per side,
// both drawn with the same seed). Throws on empty meshes.
double chamfer(const TriangleMesh& mesh_a, const TriangleMesh& mesh_b, size_t n_samples = 10000,
               uint64_t seed = 0);

// |pred AND gt| / |pred OR gt| over a shared point set; 1 when both empty.
double label_iou(const std::vector<uint8_t>& pred_labels, const std::vector<uint8_t>& gt_labels);

// Harmonic mean of precision (predicted samples within tau of a ground-truth
// sample) and recall (the reverse).
double fscore(const TriangleMesh& mesh_pred, const TriangleMesh& mesh_gt, double tau = 0.01,
              size_t n_samples = 10000, uint64_t seed = 0);

struct EvalReport {
  double chamfer_raw = 0.0;
  double chamfer_x1e3 = 0.0;
  double fscore = 0.0;
  double iou = -1.0;  // negative = labels not supplied
  double tau = 0.01;
  size_t n_samples = 10000;
  uint64_t seed = 0;

  std::string to_json() const;
};

EvalReport evaluate_meshes(const TriangleMesh& pred, const TriangleMesh& gt, double tau = 0.01,
                           size_t n_samples = 10000, uint64_t seed = 0);

}  // namespace nlos
