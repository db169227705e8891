#pragma once

#include <string>

#include "nlos/mesh.hpp"

namespace nlos {

// Wavefront OBJ. Only v/f lines are interpreted; polygon faces are
// triangulated fan-wise. Degenerate triangles are dropped on load.
TriangleMesh load_obj(const std::string& path);
void save_obj(const TriangleMesh& mesh, const std::string& path);

// Binary little-endian PLY (float vertices, uchar-counted int face lists).
void save_ply(const TriangleMesh& mesh, const std::string& path);

// Dispatches on extension (.obj / .ply).
void save_mesh(const TriangleMesh& mesh, const std::string& path);

}  // namespace nlos
