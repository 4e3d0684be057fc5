#include "sograb/metric.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace sograb {

GraspOutcome GraspOutcome::partial(double t_dropped, double t_cycle) {
  if (!(t_cycle > 0.0) || !std::isfinite(t_cycle)) {
    throw std::invalid_argument("partial outcome: t_cycle must be > 0");
  }
  if (!(t_dropped >= 0.0) || t_dropped > t_cycle) {
    throw std::invalid_argument(
        "partial outcome: t_dropped must lie in [0, t_cycle]");
  }
  GraspOutcome out(Kind::kPartial);
  out.t_dropped_ = t_dropped;
  out.t_cycle_ = t_cycle;
  return out;
}

static void check_alpha(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("dcd: alpha must be positive and finite");
  }
}

double one_sided_dcd(const PointCloud& reference, const NNIndex& target_index,
                     double alpha) {
  check_alpha(alpha);
  if (reference.empty()) {
    throw std::invalid_argument("one_sided_dcd: empty reference cloud");
  }
  const std::size_t n = reference.size();

  std::vector<NNIndex::Hit> hits(n);
  for (std::size_t i = 0; i < n; ++i) {
    hits[i] = target_index.nearest(reference.points[i]);
  }

  // Reference counts are totals over the whole pass, not running tallies, so
  // the result is independent of evaluation order.
  std::vector<std::uint32_t> ref_counts(target_index.size(), 0);
  for (const auto& hit : hits) {
    ++ref_counts[hit.index];
  }

  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sum += 1.0 - std::exp(-alpha * hits[i].distance) /
                     static_cast<double>(ref_counts[hits[i].index]);
  }
  return sum / static_cast<double>(n);
}

double dcd(const PointCloud& s1, const PointCloud& s2,
           const DCDParams& params) {
  check_alpha(params.alpha);
  if (s1.empty() || s2.empty()) {
    throw std::invalid_argument("dcd: empty cloud");
  }
  const NNIndex index1(s1);
  const NNIndex index2(s2);
  const double forward = one_sided_dcd(s1, index2, params.alpha);
  const double backward = one_sided_dcd(s2, index1, params.alpha);
  const double result = 0.5 * (forward + backward);
  assert(std::isfinite(result) && result >= 0.0 && result <= 1.0);
  return result;
}

Score grasp_score(const GraspOutcome& outcome, std::optional<double> d) {
  if (outcome.kind() == GraspOutcome::Kind::kUnsuccessful) {
    return Score{0.0};
  }
  if (!d.has_value()) {
    throw std::invalid_argument(
        "grasp_score: deformation distance required for partial and "
        "successful outcomes");
  }
  if (!(*d >= 0.0 && *d <= 1.0)) {
    throw std::invalid_argument("grasp_score: d must lie in [0, 1]");
  }
  if (outcome.kind() == GraspOutcome::Kind::kPartial) {
    return Score{(1.0 - *d) * outcome.t_dropped() / (2.0 * outcome.t_cycle())};
  }
  return Score{1.0 - *d / 2.0};
}

}  // namespace sograb
