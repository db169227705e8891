#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "nlos/mesh.hpp"
#include "nlos/vec.hpp"

namespace nlos {

// Self-intersection offset applied to both ends of the valid t range.
inline constexpr double kRayEpsilon = 1e-5;
// Moller-Trumbore determinant cutoff.
inline constexpr double kDetEpsilon = 1e-7;

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
  double t_max = std::numeric_limits<double>::infinity();
};

struct Hit {
  double t = 0.0;
  uint32_t triangle = 0;
  double u = 0.0, v = 0.0;  // barycentric weights of corners 1 and 2
};

// Two-sided Moller-Trumbore. Returns the hit parameter along the ray, or
// nothing on miss; callers apply the (epsilon, t_max - epsilon) window.
std::optional<Hit> intersect_triangle(const Vec3& v0, const Vec3& edge1, const Vec3& edge2,
                                      const Ray& ray);

// Binary BVH over triangle AABBs, median split on the longest axis,
// at most 4 triangles per leaf. Immutable after construction; all queries
// are const and safe to run concurrently.
class Bvh {
 public:
  struct Node {
    Aabb box;
    uint32_t left_first = 0;  // child index (inner) or first primitive (leaf)
    uint32_t count = 0;       // 0 for inner nodes
    bool is_leaf() const { return count > 0; }
  };

  static constexpr uint32_t kLeafSize = 4;

  bool any_hit(const Ray& ray) const;
  std::optional<Hit> closest_hit(const Ray& ray) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  size_t triangle_count() const { return tris_.size(); }

  friend Bvh build_bvh(const TriangleMesh& mesh);

 private:
  struct PackedTri {
    Vec3 v0, edge1, edge2;
    uint32_t id;  // index into the source mesh
  };

  std::vector<Node> nodes_;
  std::vector<PackedTri> tris_;

  uint32_t build_node(std::vector<PackedTri>& tris, uint32_t lo, uint32_t hi);
};

// Throws "empty geometry" for meshes without triangles.
Bvh build_bvh(const TriangleMesh& mesh);

inline bool any_hit(const Bvh& bvh, const Ray& ray) { return bvh.any_hit(ray); }
inline std::optional<Hit> closest_hit(const Bvh& bvh, const Ray& ray) {
  return bvh.closest_hit(ray);
}

// Segment visibility helper: true when the open segment a->b is blocked.
bool segment_occluded(const Bvh& bvh, const Vec3& a, const Vec3& b);

}  // namespace nlos
