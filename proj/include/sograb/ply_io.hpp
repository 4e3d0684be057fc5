#pragma once

#include <string>

#include "sograb/point_cloud.hpp"

namespace sograb {

enum class PlyFormat {
  kAscii,
  kBinaryLittleEndian,
};

// Reads a PLY point cloud (ascii or binary_little_endian, detected from the
// header). Requires float or double x/y/z vertex properties; uchar
// red/green/blue are picked up when present. Unknown vertex properties are
// skipped with a warning on stderr. Point order follows the file.
PointCloud load_cloud(const std::string& path);

// Writes the cloud as PLY. Binary files use double-precision coordinates so
// that a load/save round trip is bit-exact; ascii files carry 6 decimal
// places (at most 1e-6 m per-coordinate error). Cloud must be non-empty.
void save_cloud(const PointCloud& cloud, const std::string& path,
                PlyFormat format);

}  // namespace sograb
