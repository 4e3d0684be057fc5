#pragma once

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace sograb {

using Point3 = Eigen::Vector3d;  // coordinates in meters
using Color = std::array<std::uint8_t, 3>;

// Ordered set of 3D points with optional per-point RGB color. Treated as
// immutable by every operation in the library; functions return new clouds.
struct PointCloud {
  std::vector<Point3> points;
  std::vector<Color> colors;  // empty, or exactly one entry per point

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_colors() const { return !colors.empty(); }
};

struct AxisAlignedBox {
  Point3 min = Point3::Zero();
  Point3 max = Point3::Zero();

  bool contains(const Point3& p) const {
    return p.x() >= min.x() && p.x() <= max.x() && p.y() >= min.y() &&
           p.y() <= max.y() && p.z() >= min.z() && p.z() <= max.z();
  }
};

// Thresholds for pulling a bright, color-neutral object out of a dark scene.
struct SegmentationParams {
  int min_brightness = 128;     // keep points whose mean(r,g,b) is at least this
  int max_chroma_spread = 40;   // max channel difference for the white/grey test
  std::optional<AxisAlignedBox> crop_box;
};

// Throws std::invalid_argument naming the offending point index if any
// coordinate is NaN or infinite.
void validate_finite(const PointCloud& cloud);

// Arithmetic mean of the points. Cloud must be non-empty.
Point3 centroid(const PointCloud& cloud);

// Population covariance: mean of outer products of centered points.
Eigen::Matrix3d covariance(const PointCloud& cloud);

// One output point per occupied voxel, equal to the centroid of that voxel's
// points (colors averaged when present). Voxel keys are floor(coord / size)
// on the raw coordinates; output voxels appear in first-seen order.
PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size);

// Keeps points passing the brightness and chroma tests, then intersects with
// the crop box if given. Point order is preserved. Throws if the cloud has no
// colors or if nothing survives.
PointCloud segment_by_color(const PointCloud& cloud,
                            const SegmentationParams& params);

}  // namespace sograb
