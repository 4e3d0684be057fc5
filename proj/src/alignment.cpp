#include "sograb/alignment.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "sograb/point_cloud.hpp"

namespace sograb {

RigidTransform best_fit_transform(std::span<const Point3> source,
                                  std::span<const Point3> target) {
  if (source.size() != target.size()) {
    throw std::invalid_argument(
        "best_fit_transform: correspondence lists differ in length");
  }
  if (source.size() < 3) {
    throw std::invalid_argument(
        "best_fit_transform: need at least 3 correspondences");
  }
  const double n = static_cast<double>(source.size());

  Eigen::Vector3d source_mean = Eigen::Vector3d::Zero();
  Eigen::Vector3d target_mean = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    source_mean += source[i];
    target_mean += target[i];
  }
  source_mean /= n;
  target_mean /= n;

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    cross += (source[i] - source_mean) * (target[i] - target_mean).transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sigma = svd.singularValues();
  if (!(sigma(0) > 0.0) || sigma(1) <= 1e-12 * sigma(0)) {
    throw std::invalid_argument(
        "best_fit_transform: degenerate (collinear or coincident) "
        "correspondence set");
  }

  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) {
    d(2, 2) = -1.0;
  }

  RigidTransform out;
  out.rotation = svd.matrixV() * d * svd.matrixU().transpose();
  out.translation = target_mean - out.rotation * source_mean;
  return out;
}

ICPResult icp_align(const PointCloud& source, const PointCloud& target,
                    const RigidTransform& init, const ICPParams& params) {
  if (source.empty() || target.empty()) {
    throw std::invalid_argument("icp_align: empty cloud");
  }
  validate_rigid(init);
  if (params.max_iterations < 1) {
    throw std::invalid_argument("icp_align: max_iterations must be >= 1");
  }
  if (!(params.convergence_tol > 0.0) ||
      !(params.max_correspondence_dist > 0.0)) {
    throw std::invalid_argument("icp_align: tolerances must be > 0");
  }

  const NNIndex target_index(target);

  ICPResult result;
  result.transform = init;
  double previous_rmse = std::numeric_limits<double>::infinity();

  std::vector<Point3> matched_source;
  std::vector<Point3> matched_target;
  matched_source.reserve(source.size());
  matched_target.reserve(source.size());

  for (int iteration = 1; iteration <= params.max_iterations; ++iteration) {
    matched_source.clear();
    matched_target.clear();
    for (const Point3& p : source.points) {
      const Point3 moved = result.transform.apply(p);
      const NNIndex::Hit hit = target_index.nearest(moved);
      if (hit.distance <= params.max_correspondence_dist) {
        matched_source.push_back(moved);
        matched_target.push_back(target.points[hit.index]);
      }
    }
    if (matched_source.empty()) {
      throw std::runtime_error(
          "icp_align: correspondence set empty; increase "
          "max_correspondence_dist");
    }

    RigidTransform update;
    if (matched_source.size() >= 3) {
      update = best_fit_transform(matched_source, matched_target);
    }

    double squared_sum = 0.0;
    for (std::size_t i = 0; i < matched_source.size(); ++i) {
      squared_sum +=
          (update.apply(matched_source[i]) - matched_target[i]).squaredNorm();
    }
    const double rmse =
        std::sqrt(squared_sum / static_cast<double>(matched_source.size()));

    result.transform = orthonormalized(update * result.transform);
    result.rmse = rmse;
    result.iterations = iteration;
    result.rmse_history.push_back(rmse);

    if (std::abs(previous_rmse - rmse) < params.convergence_tol) {
      result.converged = true;
      break;
    }
    previous_rmse = rmse;
  }
  return result;
}

double nn_rmse(const PointCloud& cloud, const NNIndex& target_index) {
  if (cloud.empty()) throw std::invalid_argument("nn_rmse: empty cloud");
  double squared_sum = 0.0;
  for (const Point3& p : cloud.points) {
    const double d = target_index.nearest(p).distance;
    squared_sum += d * d;
  }
  return std::sqrt(squared_sum / static_cast<double>(cloud.size()));
}

namespace {

// Principal axes by descending eigenvalue. Exact eigenvalue ties fall back to
// lexicographic comparison of the eigenvectors; each axis sign is fixed by
// making its largest-magnitude component positive.
Eigen::Matrix3d principal_axes(const Eigen::Matrix3d& cov,
                               const char* which_cloud) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("pca_align: eigendecomposition failed");
  }
  const Eigen::Vector3d values = solver.eigenvalues();  // ascending
  if (values(2) <= 0.0 || values(0) <= 1e-9 * values(2)) {
    throw std::invalid_argument(
        std::string("degenerate geometry for PCA alignment (") + which_cloud +
        " cloud covariance is rank-deficient)");
  }

  std::array<int, 3> order = {2, 1, 0};
  for (int a = 0; a < 3; ++a) {
    for (int b = a + 1; b < 3; ++b) {
      const int i = order[a], j = order[b];
      bool swap = values(j) > values(i);
      if (values(j) == values(i)) {
        const Eigen::Vector3d vi = solver.eigenvectors().col(i);
        const Eigen::Vector3d vj = solver.eigenvectors().col(j);
        swap = std::lexicographical_compare(vi.data(), vi.data() + 3,
                                            vj.data(), vj.data() + 3);
      }
      if (swap) std::swap(order[a], order[b]);
    }
  }

  Eigen::Matrix3d axes;
  for (int k = 0; k < 3; ++k) {
    Eigen::Vector3d v = solver.eigenvectors().col(order[k]);
    int max_component = 0;
    v.cwiseAbs().maxCoeff(&max_component);
    if (v(max_component) < 0.0) v = -v;
    axes.col(k) = v;
  }
  if (axes.determinant() < 0.0) {
    axes.col(2) *= -1.0;
  }
  return axes;
}

}  // namespace

RigidTransform pca_align(const PointCloud& source, const PointCloud& target) {
  if (source.empty() || target.empty()) {
    throw std::invalid_argument("pca_align: empty cloud");
  }
  const Point3 source_centroid = centroid(source);
  const Point3 target_centroid = centroid(target);
  const Eigen::Matrix3d source_axes =
      principal_axes(covariance(source), "source");
  const Eigen::Matrix3d target_axes =
      principal_axes(covariance(target), "target");

  const NNIndex target_index(target);

  // The four proper sign assignments of the axis pairing; the identity
  // assignment goes first so exact ties keep it.
  static const std::array<Eigen::Vector3d, 4> kSigns = {
      Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(1, -1, -1),
      Eigen::Vector3d(-1, 1, -1), Eigen::Vector3d(-1, -1, 1)};

  RigidTransform best;
  double best_cost = std::numeric_limits<double>::infinity();
  for (const Eigen::Vector3d& signs : kSigns) {
    RigidTransform candidate;
    candidate.rotation =
        target_axes * signs.asDiagonal() * source_axes.transpose();
    candidate.translation =
        target_centroid - candidate.rotation * source_centroid;

    double distance_sum = 0.0;
    for (const Point3& p : source.points) {
      distance_sum += target_index.nearest(candidate.apply(p)).distance;
    }
    const double cost = distance_sum / static_cast<double>(source.size());
    if (cost < best_cost) {
      best_cost = cost;
      best = candidate;
    }
  }
  return best;
}

}  // namespace sograb
