#include "nlos/mesh_io.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nlos {

TriangleMesh load_obj(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open mesh file: " + path);

  TriangleMesh mesh;
  std::string line;
  std::vector<uint32_t> face;
  while (std::getline(in, line)) {
    if (line.size() < 2) continue;
    std::istringstream ss(line);
    std::string tag;
    ss >> tag;
    if (tag == "v") {
      Vec3 v;
      ss >> v.x >> v.y >> v.z;
      mesh.vertices.push_back(v);
    } else if (tag == "f") {
      face.clear();
      std::string tok;
      while (ss >> tok) {
        // "i", "i/t", "i/t/n", "i//n"; negative indices are relative
        long idx = std::strtol(tok.c_str(), nullptr, 10);
        if (idx < 0) idx = static_cast<long>(mesh.vertices.size()) + idx + 1;
        if (idx <= 0 || idx > static_cast<long>(mesh.vertices.size())) {
          throw std::runtime_error("OBJ face index out of range in " + path);
        }
        face.push_back(static_cast<uint32_t>(idx - 1));
      }
      for (size_t i = 2; i < face.size(); ++i) {
        mesh.triangles.push_back({face[0], face[i - 1], face[i]});
      }
    }
  }
  mesh.albedo.assign(mesh.triangles.size(), 1.0);
  mesh.cleanup();
  if (mesh.empty()) throw std::runtime_error("empty geometry");
  return mesh;
}

void save_obj(const TriangleMesh& mesh, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  out.precision(9);
  for (const Vec3& v : mesh.vertices) {
    out << "v " << v.x << " " << v.y << " " << v.z << "\n";
  }
  for (const auto& t : mesh.triangles) {
    out << "f " << t[0] + 1 << " " << t[1] + 1 << " " << t[2] + 1 << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void save_ply(const TriangleMesh& mesh, const std::string& path) {
  static_assert(sizeof(float) == 4 && sizeof(uint32_t) == 4);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write mesh file: " + path);
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << mesh.vertices.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "element face " << mesh.triangles.size() << "\n"
      << "property list uchar int vertex_indices\n"
      << "end_header\n";
  for (const Vec3& v : mesh.vertices) {
    float xyz[3] = {static_cast<float>(v.x), static_cast<float>(v.y), static_cast<float>(v.z)};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
  }
  for (const auto& t : mesh.triangles) {
    uint8_t n = 3;
    int32_t idx[3] = {static_cast<int32_t>(t[0]), static_cast<int32_t>(t[1]),
                      static_cast<int32_t>(t[2])};
    out.write(reinterpret_cast<const char*>(&n), 1);
    out.write(reinterpret_cast<const char*>(idx), sizeof(idx));
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

void save_mesh(const TriangleMesh& mesh, const std::string& path) {
  auto pos = path.rfind('.');
  std::string ext = pos == std::string::npos ? "" : path.substr(pos);
  if (ext == ".ply") {
    save_ply(mesh, path);
  } else {
    save_obj(mesh, path);
  }
}

}  // namespace nlos
