#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sograb/point_cloud.hpp"

namespace sograb {

// Balanced k-d tree over a point cloud. Immutable after construction and safe
// for concurrent queries. nearest() returns exactly the brute-force answer;
// equidistant candidates resolve to the lowest point index.
class NNIndex {
 public:
  struct Hit {
    std::size_t index = 0;
    double distance = 0.0;  // Euclidean, meters
  };

  explicit NNIndex(const PointCloud& cloud);

  Hit nearest(const Point3& query) const;

  std::size_t size() const { return points_.size(); }

 private:
  struct Node {
    // Leaves hold [begin, end) into order_; inner nodes split on an axis.
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int axis = -1;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search(std::int32_t node_id, const Point3& query, double& best_d2,
              std::size_t& best_index) const;

  std::vector<Point3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
  std::int32_t root_ = -1;

  static constexpr std::uint32_t kLeafSize = 16;
};

}  // namespace sograb
