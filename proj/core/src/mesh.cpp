#include "nlos/mesh.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

namespace nlos {

double TriangleMesh::total_area() const {
  double sum = 0.0;
  for (uint32_t i = 0; i < triangles.size(); ++i) sum += area(i);
  return sum;
}

Aabb TriangleMesh::bounds() const {
  Aabb box;
  for (const Vec3& v : vertices) box.grow(v);
  return box;
}

void TriangleMesh::cleanup(double area_eps) {
  for (const auto& t : triangles) {
    for (uint32_t idx : t) {
      if (idx >= vertices.size()) throw std::invalid_argument("triangle index out of range");
    }
  }
  if (albedo.size() != triangles.size()) albedo.resize(triangles.size(), 1.0);
  std::vector<std::array<uint32_t, 3>> kept;
  std::vector<double> kept_albedo;
  kept.reserve(triangles.size());
  kept_albedo.reserve(triangles.size());
  for (uint32_t i = 0; i < triangles.size(); ++i) {
    if (area(i) > area_eps) {
      kept.push_back(triangles[i]);
      kept_albedo.push_back(albedo[i]);
    }
  }
  triangles = std::move(kept);
  albedo = std::move(kept_albedo);
}

void TriangleMesh::merge(const TriangleMesh& other) {
  uint32_t base = static_cast<uint32_t>(vertices.size());
  vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
  for (const auto& t : other.triangles) {
    triangles.push_back({t[0] + base, t[1] + base, t[2] + base});
  }
  const double def = 1.0;
  for (uint32_t i = 0; i < other.triangles.size(); ++i) {
    albedo.push_back(i < other.albedo.size() ? other.albedo[i] : def);
  }
}

void TriangleMesh::normalize_unit_cube() {
  Aabb box = bounds();
  if (box.empty()) throw std::invalid_argument("empty geometry");
  Vec3 c = box.center();
  Vec3 e = box.extent();
  double longest = std::max({e.x, e.y, e.z});
  double s = longest > 0.0 ? 1.0 / longest : 1.0;
  for (Vec3& v : vertices) v = (v - c) * s;
}

namespace {

struct Mat3 {
  double m[3][3];
  Vec3 operator*(const Vec3& v) const {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        r.m[i][j] = 0.0;
        for (int k = 0; k < 3; ++k) r.m[i][j] += m[i][k] * o.m[k][j];
      }
    return r;
  }
};

Mat3 rotation_matrix(const Vec3& euler_deg) {
  const double d2r = 0.017453292519943295;
  double cx = std::cos(euler_deg.x * d2r), sx = std::sin(euler_deg.x * d2r);
  double cy = std::cos(euler_deg.y * d2r), sy = std::sin(euler_deg.y * d2r);
  double cz = std::cos(euler_deg.z * d2r), sz = std::sin(euler_deg.z * d2r);
  Mat3 rx{{{1, 0, 0}, {0, cx, -sx}, {0, sx, cx}}};
  Mat3 ry{{{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}}};
  Mat3 rz{{{cz, -sz, 0}, {sz, cz, 0}, {0, 0, 1}}};
  // X applied first, then Y, then Z
  return rz * (ry * rx);
}

}  // namespace

Vec3 AffineTransform::apply(const Vec3& p) const {
  Mat3 r = rotation_matrix(rotation_deg);
  return r * (p * scale) + translation;
}

TriangleMesh apply_transform_unchecked(const TriangleMesh& mesh, const AffineTransform& xf) {
  TriangleMesh out = mesh;
  Mat3 r = rotation_matrix(xf.rotation_deg);
  for (Vec3& v : out.vertices) v = r * (v * xf.scale) + xf.translation;
  return out;
}

TriangleMesh apply_transform(const TriangleMesh& mesh, const AffineTransform& xf) {
  TriangleMesh out = apply_transform_unchecked(mesh, xf);
  const double eps = 1e-12;
  for (const Vec3& v : out.vertices) {
    if (std::abs(v.x) > 0.5 + eps || std::abs(v.y) > 0.5 + eps || std::abs(v.z) > 0.5 + eps) {
      throw std::runtime_error("out of scene bounds");
    }
  }
  return out;
}

namespace {

// Grid-tessellated rectangle in the z=0 plane, normals facing -z.
void add_rect(TriangleMesh& mesh, double x0, double x1, double y0, double y1, double cell) {
  int nx = std::max(1, static_cast<int>(std::ceil((x1 - x0) / cell)));
  int ny = std::max(1, static_cast<int>(std::ceil((y1 - y0) / cell)));
  uint32_t base = static_cast<uint32_t>(mesh.vertices.size());
  for (int j = 0; j <= ny; ++j) {
    for (int i = 0; i <= nx; ++i) {
      mesh.vertices.push_back({x0 + (x1 - x0) * i / nx, y0 + (y1 - y0) * j / ny, 0.0});
    }
  }
  auto vid = [&](int i, int j) { return base + static_cast<uint32_t>(j * (nx + 1) + i); };
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      // winding so that cross(v1-v0, v2-v0) points along -z
      mesh.triangles.push_back({vid(i, j), vid(i, j + 1), vid(i + 1, j)});
      mesh.triangles.push_back({vid(i + 1, j), vid(i, j + 1), vid(i + 1, j + 1)});
    }
  }
  mesh.albedo.resize(mesh.triangles.size(), 1.0);
}

}  // namespace

TriangleMesh make_plate(int tessellation) {
  TriangleMesh mesh;
  add_rect(mesh, -0.5, 0.5, -0.5, 0.5, 1.0 / tessellation);
  return mesh;
}

TriangleMesh make_box(double depth) {
  TriangleMesh mesh;
  double hz = 0.5 * depth;
  Vec3 corners[8] = {
      {-0.5, -0.5, -hz}, {0.5, -0.5, -hz}, {0.5, 0.5, -hz}, {-0.5, 0.5, -hz},
      {-0.5, -0.5, hz},  {0.5, -0.5, hz},  {0.5, 0.5, hz},  {-0.5, 0.5, hz}};
  mesh.vertices.assign(corners, corners + 8);
  // outward normals
  const uint32_t quads[6][4] = {
      {0, 3, 2, 1},  // -z (front, facing the wall)
      {4, 5, 6, 7},  // +z
      {0, 1, 5, 4},  // -y
      {2, 3, 7, 6},  // +y
      {0, 4, 7, 3},  // -x
      {1, 2, 6, 5},  // +x
  };
  for (const auto& q : quads) {
    mesh.triangles.push_back({q[0], q[1], q[2]});
    mesh.triangles.push_back({q[0], q[2], q[3]});
  }
  mesh.albedo.resize(mesh.triangles.size(), 1.0);
  mesh.normalize_unit_cube();
  return mesh;
}

TriangleMesh make_sphere(int subdivisions) {
  // icosphere, radius 0.5
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  std::vector<std::array<uint32_t, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (Vec3& v : verts) v = normalized(v);

  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<uint32_t, uint32_t>, uint32_t> midpoint;
    auto mid = [&](uint32_t a, uint32_t b) -> uint32_t {
      auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      uint32_t idx = static_cast<uint32_t>(verts.size());
      verts.push_back(normalized(0.5 * (verts[a] + verts[b])));
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<uint32_t, 3>> next;
    next.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      uint32_t ab = mid(f[0], f[1]), bc = mid(f[1], f[2]), ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }

  TriangleMesh mesh;
  mesh.vertices.reserve(verts.size());
  for (const Vec3& v : verts) mesh.vertices.push_back(0.5 * v);
  mesh.triangles = std::move(faces);
  mesh.albedo.resize(mesh.triangles.size(), 1.0);
  return mesh;
}

TriangleMesh make_letter(char letter, int cells_per_unit) {
  TriangleMesh mesh;
  double c = 1.0 / cells_per_unit;
  switch (letter) {
    case 'L':
      add_rect(mesh, -0.5, -0.1, -0.5, 0.5, c);
      add_rect(mesh, -0.1, 0.5, -0.5, -0.1, c);
      break;
    case 'T':
      add_rect(mesh, -0.5, 0.5, 0.1, 0.5, c);
      add_rect(mesh, -0.2, 0.2, -0.5, 0.1, c);
      break;
    case 'I':
      add_rect(mesh, -0.2, 0.2, -0.5, 0.5, c);
      break;
    case 'H':
      add_rect(mesh, -0.5, -0.2, -0.5, 0.5, c);
      add_rect(mesh, 0.2, 0.5, -0.5, 0.5, c);
      add_rect(mesh, -0.2, 0.2, -0.15, 0.15, c);
      break;
    default:
      throw std::invalid_argument("unsupported letter fixture");
  }
  return mesh;
}

}  // namespace nlos
