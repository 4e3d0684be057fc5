#include "sograb/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace sograb {

NNIndex::NNIndex(const PointCloud& cloud) : points_(cloud.points) {
  if (points_.empty()) {
    throw std::invalid_argument("NNIndex: empty cloud");
  }
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points_.size() / kLeafSize + 2);
  root_ = build(0, static_cast<std::uint32_t>(order_.size()));
  // Lay the points out in partition order so leaf scans are contiguous;
  // order_[i] keeps the original index for results and tie-breaking.
  std::vector<Point3> arranged(points_.size());
  for (std::size_t i = 0; i < order_.size(); ++i) {
    arranged[i] = points_[order_[i]];
  }
  points_ = std::move(arranged);
}

std::int32_t NNIndex::build(std::uint32_t begin, std::uint32_t end) {
  const std::int32_t id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafSize) {
    return id;
  }

  Point3 lo = points_[order_[begin]];
  Point3 hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);

  const std::uint32_t mid = begin + (end - begin) / 2;
  // Unique (coordinate, index) keys make the partition deterministic.
  std::nth_element(order_.begin() + begin, order_.begin() + mid,
                   order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis];
                     const double cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });

  nodes_[id].axis = axis;
  nodes_[id].split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void NNIndex::search(std::int32_t node_id, const Point3& query, double& best_d2,
                     std::size_t& best_index) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const double d2 = (points_[i] - query).squaredNorm();
      const std::size_t original = order_[i];
      if (d2 < best_d2 || (d2 == best_d2 && original < best_index)) {
        best_d2 = d2;
        best_index = original;
      }
    }
    return;
  }
  const double diff = query[node.axis] - node.split;
  const std::int32_t near = diff < 0.0 ? node.left : node.right;
  const std::int32_t far = diff < 0.0 ? node.right : node.left;
  search(near, query, best_d2, best_index);
  // A tied point with a lower index may sit exactly on the boundary, so only
  // prune when the far half-space is strictly worse.
  if (diff * diff <= best_d2) {
    search(far, query, best_d2, best_index);
  }
}

NNIndex::Hit NNIndex::nearest(const Point3& query) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  std::size_t best_index = points_.size();
  search(root_, query, best_d2, best_index);
  return Hit{best_index, std::sqrt(best_d2)};
}

}  // namespace sograb
