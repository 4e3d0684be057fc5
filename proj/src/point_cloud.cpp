#include "sograb/point_cloud.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace sograb {

namespace {

struct VoxelKey {
  std::int64_t x, y, z;
  bool operator==(const VoxelKey&) const = default;
};

struct VoxelKeyHash {
  std::size_t operator()(const VoxelKey& k) const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::uint64_t v : {static_cast<std::uint64_t>(k.x),
                            static_cast<std::uint64_t>(k.y),
                            static_cast<std::uint64_t>(k.z)}) {
      h ^= v;
      h *= 0x100000001b3ull;
    }
    return static_cast<std::size_t>(h);
  }
};

struct VoxelAccumulator {
  Eigen::Vector3d point_sum = Eigen::Vector3d::Zero();
  Eigen::Vector3d color_sum = Eigen::Vector3d::Zero();
  std::size_t count = 0;
};

int brightness(const Color& c) { return (c[0] + c[1] + c[2]) / 3; }

int chroma_spread(const Color& c) {
  const int rg = std::abs(int(c[0]) - int(c[1]));
  const int gb = std::abs(int(c[1]) - int(c[2]));
  const int rb = std::abs(int(c[0]) - int(c[2]));
  return std::max(rg, std::max(gb, rb));
}

}  // namespace

void validate_finite(const PointCloud& cloud) {
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (!cloud.points[i].allFinite()) {
      throw std::invalid_argument("non-finite coordinate at point index " +
                                  std::to_string(i));
    }
  }
}

Point3 centroid(const PointCloud& cloud) {
  if (cloud.empty()) throw std::invalid_argument("centroid: empty cloud");
  Eigen::Vector3d sum = Eigen::Vector3d::Zero();
  for (const auto& p : cloud.points) sum += p;
  return sum / static_cast<double>(cloud.size());
}

Eigen::Matrix3d covariance(const PointCloud& cloud) {
  if (cloud.empty()) throw std::invalid_argument("covariance: empty cloud");
  const Point3 c = centroid(cloud);
  Eigen::Matrix3d acc = Eigen::Matrix3d::Zero();
  for (const auto& p : cloud.points) {
    const Eigen::Vector3d d = p - c;
    acc += d * d.transpose();
  }
  return acc / static_cast<double>(cloud.size());
}

PointCloud voxel_downsample(const PointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0)) {
    throw std::invalid_argument("voxel_downsample: voxel_size must be > 0");
  }
  const bool with_colors = cloud.has_colors();
  std::unordered_map<VoxelKey, VoxelAccumulator, VoxelKeyHash> voxels;
  voxels.reserve(cloud.size());
  std::vector<VoxelKey> seen_order;
  seen_order.reserve(cloud.size());

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Point3& p = cloud.points[i];
    const VoxelKey key{
        static_cast<std::int64_t>(std::floor(p.x() / voxel_size)),
        static_cast<std::int64_t>(std::floor(p.y() / voxel_size)),
        static_cast<std::int64_t>(std::floor(p.z() / voxel_size))};
    auto [it, inserted] = voxels.try_emplace(key);
    if (inserted) seen_order.push_back(key);
    it->second.point_sum += p;
    if (with_colors) {
      const Color& c = cloud.colors[i];
      it->second.color_sum += Eigen::Vector3d(c[0], c[1], c[2]);
    }
    ++it->second.count;
  }

  PointCloud out;
  out.points.reserve(seen_order.size());
  if (with_colors) out.colors.reserve(seen_order.size());
  for (const VoxelKey& key : seen_order) {
    const VoxelAccumulator& acc = voxels.at(key);
    const double n = static_cast<double>(acc.count);
    out.points.push_back(acc.point_sum / n);
    if (with_colors) {
      const Eigen::Vector3d mean = acc.color_sum / n;
      out.colors.push_back(Color{
          static_cast<std::uint8_t>(std::lround(mean.x())),
          static_cast<std::uint8_t>(std::lround(mean.y())),
          static_cast<std::uint8_t>(std::lround(mean.z()))});
    }
  }
  return out;
}

PointCloud segment_by_color(const PointCloud& cloud,
                            const SegmentationParams& params) {
  if (!cloud.has_colors()) {
    throw std::invalid_argument("segment_by_color: cloud has no colors");
  }
  if (params.min_brightness < 0 || params.min_brightness > 255 ||
      params.max_chroma_spread < 0 || params.max_chroma_spread > 255) {
    throw std::invalid_argument(
        "segment_by_color: thresholds must lie in [0, 255]");
  }
  PointCloud out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Color& c = cloud.colors[i];
    if (brightness(c) < params.min_brightness) continue;
    if (chroma_spread(c) > params.max_chroma_spread) continue;
    if (params.crop_box && !params.crop_box->contains(cloud.points[i])) {
      continue;
    }
    out.points.push_back(cloud.points[i]);
    out.colors.push_back(c);
  }
  if (out.empty()) {
    throw std::runtime_error("segmentation removed all points");
  }
  return out;
}

}  // namespace sograb
