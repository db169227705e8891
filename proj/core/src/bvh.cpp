#include "nlos/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nlos {

std::optional<Hit> intersect_triangle(const Vec3& v0, const Vec3& edge1, const Vec3& edge2,
                                      const Ray& ray) {
  Vec3 pvec = cross(ray.direction, edge2);
  double det = dot(edge1, pvec);
  if (std::abs(det) < kDetEpsilon) return std::nullopt;
  double inv_det = 1.0 / det;
  Vec3 tvec = ray.origin - v0;
  double u = dot(tvec, pvec) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  Vec3 qvec = cross(tvec, edge1);
  double v = dot(ray.direction, qvec) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  Hit hit;
  hit.t = dot(edge2, qvec) * inv_det;
  hit.u = u;
  hit.v = v;
  return hit;
}

namespace {

// Slab test, inclusive at boundaries so axis-aligned rays touching a flat
// AABB still count. Axes with zero direction only reject when the origin
// lies strictly outside the slab; this avoids the 0 * inf = NaN false miss.
inline bool hit_aabb(const Aabb& box, const Vec3& origin, const Vec3& inv_dir, double t_limit) {
  double tmin = 0.0;
  double tmax = t_limit;
  for (int a = 0; a < 3; ++a) {
    double inv = inv_dir[a];
    double o = origin[a];
    if (std::isinf(inv)) {
      if (o < box.lo[a] || o > box.hi[a]) return false;
      continue;
    }
    double t0 = (box.lo[a] - o) * inv;
    double t1 = (box.hi[a] - o) * inv;
    if (t0 > t1) std::swap(t0, t1);
    tmin = std::max(tmin, t0);
    tmax = std::min(tmax, t1);
    if (tmax < tmin) return false;
  }
  return true;
}

inline Aabb tri_bounds(const Vec3& v0, const Vec3& e1, const Vec3& e2) {
  Aabb box;
  box.grow(v0);
  box.grow(v0 + e1);
  box.grow(v0 + e2);
  return box;
}

}  // namespace

// Depth-first layout: the left child of an inner node is the next node,
// left_first holds the right child index.
uint32_t Bvh::build_node(std::vector<PackedTri>& tris, uint32_t lo, uint32_t hi) {
  uint32_t index = static_cast<uint32_t>(nodes_.size());
  nodes_.emplace_back();

  Aabb box;
  for (uint32_t i = lo; i < hi; ++i) {
    box.grow(tri_bounds(tris[i].v0, tris[i].edge1, tris[i].edge2));
  }
  nodes_[index].box = box;

  uint32_t count = hi - lo;
  if (count <= kLeafSize) {
    nodes_[index].left_first = lo;
    nodes_[index].count = count;
    return index;
  }

  int axis = box.longest_axis();
  uint32_t mid = lo + count / 2;
  std::nth_element(tris.begin() + lo, tris.begin() + mid, tris.begin() + hi,
                   [axis](const PackedTri& a, const PackedTri& b) {
                     double ca = a.v0[axis] + (a.edge1[axis] + a.edge2[axis]) / 3.0;
                     double cb = b.v0[axis] + (b.edge1[axis] + b.edge2[axis]) / 3.0;
                     return ca < cb;
                   });

  build_node(tris, lo, mid);
  uint32_t right = build_node(tris, mid, hi);
  nodes_[index].left_first = right;
  nodes_[index].count = 0;
  return index;
}

Bvh build_bvh(const TriangleMesh& mesh) {
  if (mesh.empty()) throw std::invalid_argument("empty geometry");
  Bvh bvh;
  bvh.tris_.reserve(mesh.triangle_count());
  for (uint32_t i = 0; i < mesh.triangle_count(); ++i) {
    const auto& t = mesh.triangles[i];
    Bvh::PackedTri p;
    p.v0 = mesh.vertices[t[0]];
    p.edge1 = mesh.vertices[t[1]] - p.v0;
    p.edge2 = mesh.vertices[t[2]] - p.v0;
    p.id = i;
    bvh.tris_.push_back(p);
  }
  bvh.nodes_.reserve(2 * mesh.triangle_count());
  bvh.build_node(bvh.tris_, 0, static_cast<uint32_t>(bvh.tris_.size()));
  return bvh;
}

bool Bvh::any_hit(const Ray& ray) const {
  if (nodes_.empty()) return false;
  Vec3 inv_dir{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
  double t_hi = ray.t_max - kRayEpsilon;

  uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    uint32_t idx = stack[--top];
    const Node& node = nodes_[idx];
    if (!hit_aabb(node.box, ray.origin, inv_dir, t_hi)) continue;
    if (node.is_leaf()) {
      for (uint32_t i = node.left_first; i < node.left_first + node.count; ++i) {
        auto hit = intersect_triangle(tris_[i].v0, tris_[i].edge1, tris_[i].edge2, ray);
        if (hit && hit->t > kRayEpsilon && hit->t < t_hi) return true;
      }
    } else {
      stack[top++] = idx + 1;
      stack[top++] = node.left_first;
    }
  }
  return false;
}

std::optional<Hit> Bvh::closest_hit(const Ray& ray) const {
  if (nodes_.empty()) return std::nullopt;
  Vec3 inv_dir{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};
  double t_hi = ray.t_max - kRayEpsilon;

  std::optional<Hit> best;
  uint32_t stack[64];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    uint32_t idx = stack[--top];
    const Node& node = nodes_[idx];
    double limit = best ? best->t : t_hi;
    if (!hit_aabb(node.box, ray.origin, inv_dir, limit)) continue;
    if (node.is_leaf()) {
      for (uint32_t i = node.left_first; i < node.left_first + node.count; ++i) {
        auto hit = intersect_triangle(tris_[i].v0, tris_[i].edge1, tris_[i].edge2, ray);
        if (hit && hit->t > kRayEpsilon && hit->t < t_hi && (!best || hit->t < best->t)) {
          best = *hit;
          best->triangle = tris_[i].id;
        }
      }
    } else {
      stack[top++] = idx + 1;
      stack[top++] = node.left_first;
    }
  }
  return best;
}

bool segment_occluded(const Bvh& bvh, const Vec3& a, const Vec3& b) {
  Vec3 d = b - a;
  double dist = length(d);
  if (dist <= kRayEpsilon) return false;
  Ray ray{a, d / dist, dist - kRayEpsilon};
  return bvh.any_hit(ray);
}

}  // namespace nlos
