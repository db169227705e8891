#pragma once

namespace nlos {

// Classic 256-case marching cubes lookup tables.
extern const int kMcEdgeTable[256];
extern const int kMcTriTable[256][16];

}  // namespace nlos
