#pragma once

#include <optional>

#include "sograb/kdtree.hpp"
#include "sograb/point_cloud.hpp"

namespace sograb {

struct DCDParams {
  double alpha = 100.0;  // sensitivity, 1/m; larger = more sensitive
};

// Outcome of one grasp attempt. Partial means the object was dropped after
// the grasped cloud was captured but before placement.
class GraspOutcome {
 public:
  enum class Kind { kUnsuccessful, kPartial, kSuccessful };

  static GraspOutcome unsuccessful() { return GraspOutcome(Kind::kUnsuccessful); }
  static GraspOutcome successful() { return GraspOutcome(Kind::kSuccessful); }
  static GraspOutcome partial(double t_dropped, double t_cycle);

  Kind kind() const { return kind_; }
  double t_dropped() const { return t_dropped_; }
  double t_cycle() const { return t_cycle_; }

 private:
  explicit GraspOutcome(Kind kind) : kind_(kind) {}

  Kind kind_;
  double t_dropped_ = 0.0;  // seconds, Partial only
  double t_cycle_ = 0.0;    // seconds, Partial only
};

struct Score {
  double value = 0.0;  // dimensionless, in [0, 1]
};

// One direction of the density-aware Chamfer distance: mean over the
// reference cloud of 1 - (1/n) * exp(-alpha * d), where d is the distance to
// the nearest target point and n is the total number of reference points
// that share that target point (counted over the whole pass). Result in [0, 1).
double one_sided_dcd(const PointCloud& reference, const NNIndex& target_index,
                     double alpha);

// Symmetric density-aware Chamfer distance: each cloud takes a turn as the
// reference and the two directions are averaged. Result in [0, 1];
// dcd(a, b) == dcd(b, a) bit-exactly and dcd(a, a) == 0.
double dcd(const PointCloud& s1, const PointCloud& s2, const DCDParams& params);

// Scalar grasp score from outcome and deformation distance d:
//   Unsuccessful -> 0 (d may be absent; no grasped cloud exists)
//   Partial      -> (1 - d) * t_dropped / (2 * t_cycle), in [0, 0.5]
//   Successful   -> 1 - d/2, in [0.5, 1]
Score grasp_score(const GraspOutcome& outcome, std::optional<double> d);

}  // namespace sograb
