#pragma once

#include <span>
#include <vector>

#include "sograb/kdtree.hpp"
#include "sograb/point_cloud.hpp"
#include "sograb/transform.hpp"

namespace sograb {

struct ICPParams {
  int max_iterations = 50;
  double convergence_tol = 1e-6;          // |change in RMSE| between iterations, m
  double max_correspondence_dist = 0.01;  // reject pairs farther than this, m
};

struct ICPResult {
  RigidTransform transform;  // cumulative source -> target
  double rmse = 0.0;         // over surviving correspondences, m
  int iterations = 0;
  bool converged = false;
  std::vector<double> rmse_history;  // one entry per iteration
};

// Least-squares rigid fit (SVD): the proper rotation + translation minimizing
// sum ||R*src[i] + t - dst[i]||^2. Needs >= 3 non-collinear correspondences;
// a reflection solution is corrected by flipping the smallest singular vector.
RigidTransform best_fit_transform(std::span<const Point3> source,
                                  std::span<const Point3> target);

// Point-to-point ICP. Alternates nearest-neighbor correspondence from the
// transformed source into the target (pairs beyond max_correspondence_dist
// are dropped) with a least-squares update, until the RMSE change falls
// below convergence_tol or the iteration budget runs out.
ICPResult icp_align(const PointCloud& source, const PointCloud& target,
                    const RigidTransform& init, const ICPParams& params);

// Aligns centroids and principal axes (eigenvectors of the covariance,
// descending eigenvalue order). Of the four proper sign assignments, returns
// the one minimizing the one-sided mean nearest-neighbor distance from the
// transformed source into the target.
RigidTransform pca_align(const PointCloud& source, const PointCloud& target);

// Root-mean-square nearest-neighbor distance from cloud into the index;
// reported as the residual for PCA alignments.
double nn_rmse(const PointCloud& cloud, const NNIndex& target_index);

}  // namespace sograb
