#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>

#include "sograb/alignment.hpp"
#include "sograb/metric.hpp"
#include "sograb/rng.hpp"
#include "sograb/synth.hpp"
#include "test_support.hpp"

using namespace sograb;
using sograb::testing::asymmetric_blob;
using sograb::testing::random_cloud;
using sograb::testing::random_rigid;
using sograb::testing::random_unit_vector;

namespace {

RigidTransform rotation_about_z(double angle_rad,
                                const Eigen::Vector3d& translation =
                                    Eigen::Vector3d::Zero()) {
  RigidTransform t;
  t.rotation =
      Eigen::AngleAxisd(angle_rad, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  t.translation = translation;
  return t;
}

double rotation_error(const RigidTransform& a, const RigidTransform& b) {
  return rotation_angle_between(a, b);
}

}  // namespace

TEST_CASE("apply_transform basics") {
  PointCloud cloud;
  cloud.points.emplace_back(1, 0, 0);
  cloud.colors.push_back(Color{1, 2, 3});

  const PointCloud same = apply_transform(cloud, RigidTransform::identity());
  CHECK(same.points[0] == cloud.points[0]);
  CHECK(same.colors == cloud.colors);

  RigidTransform shift;
  shift.translation = Point3(0.1, 0, 0);
  PointCloud origin;
  origin.points.emplace_back(0, 0, 0);
  CHECK(apply_transform(origin, shift).points[0] == Point3(0.1, 0, 0));

  const PointCloud rotated =
      apply_transform(cloud, rotation_about_z(std::numbers::pi / 2));
  CHECK((rotated.points[0] - Point3(0, 1, 0)).norm() <= 1e-12);
}

TEST_CASE("best_fit_transform recovers exact correspondences") {
  Rng rng(21);
  const PointCloud cloud = random_cloud(rng, 60, 0.1);

  SUBCASE("identity on matching input") {
    const RigidTransform t =
        best_fit_transform(cloud.points, cloud.points);
    CHECK(rotation_error(t, RigidTransform::identity()) <= 1e-10);
    CHECK(t.translation.norm() <= 1e-12);
    double residual = 0.0;
    for (const Point3& p : cloud.points) {
      residual = std::max(residual, (t.apply(p) - p).norm());
    }
    CHECK(residual <= 1e-10);
  }
  SUBCASE("known rotation and translation") {
    const RigidTransform truth =
        rotation_about_z(30.0 * std::numbers::pi / 180.0, {0.02, -0.01, 0.03});
    const PointCloud moved = apply_transform(cloud, truth);
    const RigidTransform fit = best_fit_transform(cloud.points, moved.points);
    CHECK(rotation_error(fit, truth) <= 1e-10);
    CHECK((fit.translation - truth.translation).norm() <= 1e-10);
    CHECK(is_rigid(fit));
  }
  SUBCASE("noisy correspondences stay within half a degree") {
    Rng noise_rng(22);
    const RigidTransform truth = random_rigid(noise_rng, 0.8, 0.05);
    PointCloud src = random_cloud(noise_rng, 100, 0.05);
    PointCloud dst = apply_transform(src, truth);
    for (Point3& p : dst.points) {
      p += 0.001 * Point3(noise_rng.normal(), noise_rng.normal(),
                          noise_rng.normal());
    }
    const RigidTransform fit = best_fit_transform(src.points, dst.points);
    CHECK(rotation_error(fit, truth) <= 0.5 * std::numbers::pi / 180.0);
  }
}

TEST_CASE("best_fit_transform rejects degenerate input") {
  std::vector<Point3> line;
  for (int i = 0; i < 10; ++i) line.emplace_back(i * 0.01, 0, 0);
  CHECK_THROWS_AS(best_fit_transform(line, line), std::invalid_argument);

  std::vector<Point3> coincident(5, Point3(1, 2, 3));
  CHECK_THROWS_AS(best_fit_transform(coincident, coincident),
                  std::invalid_argument);

  std::vector<Point3> two = {Point3(0, 0, 0), Point3(1, 0, 0)};
  CHECK_THROWS_AS(best_fit_transform(two, two), std::invalid_argument);

  std::vector<Point3> three = {Point3(0, 0, 0), Point3(1, 0, 0),
                               Point3(0, 1, 0)};
  std::vector<Point3> four = {Point3(0, 0, 0), Point3(1, 0, 0), Point3(0, 1, 0),
                              Point3(0, 0, 1)};
  CHECK_THROWS_AS(best_fit_transform(three, four), std::invalid_argument);
}

TEST_CASE("icp_align on identical clouds converges immediately") {
  ShapeSpec spec;
  spec.n_points = 400;
  spec.seed = 31;
  const PointCloud cloud = sample_shape(spec);
  const ICPResult result =
      icp_align(cloud, cloud, RigidTransform::identity(), ICPParams{});
  CHECK(result.converged);
  CHECK(result.iterations <= 2);
  CHECK(result.rmse <= 1e-12);
  CHECK(rotation_error(result.transform, RigidTransform::identity()) <= 1e-9);
}

TEST_CASE("icp_align recovers a known rigid motion") {
  ShapeSpec spec;
  spec.n_points = 2000;
  spec.seed = 32;
  const PointCloud source = sample_shape(spec);

  Rng rng(33);
  const RigidTransform truth = random_rigid(rng, 20.0 * std::numbers::pi / 180.0,
                                            0.03);
  const PointCloud target = apply_transform(source, truth);
  // Initial guess off by a few degrees and millimeters.
  const RigidTransform init = random_rigid(rng, 5.0 * std::numbers::pi / 180.0,
                                           0.01) *
                              truth;
  ICPParams params;
  params.max_correspondence_dist = 0.05;
  const ICPResult result = icp_align(source, target, init, params);

  CHECK(result.converged);
  CHECK(rotation_error(result.transform, truth) <= 1e-3);
  CHECK(result.rmse <= 1e-4);
  CHECK(is_rigid(result.transform));
  for (std::size_t i = 1; i < result.rmse_history.size(); ++i) {
    CHECK(result.rmse_history[i] <= result.rmse_history[i - 1] + 1e-12);
  }
}

TEST_CASE("icp_align tolerates moderate deformation") {
  ShapeSpec spec;
  spec.n_points = 1500;
  spec.seed = 34;
  const PointCloud source = sample_shape(spec);

  DeformSpec deform_spec;
  deform_spec.squash_ratio = 0.9;
  deform_spec.rigid_motion = rotation_about_z(0.15, {0.01, -0.005, 0.0});
  const DeformResult deformed = deform(source, deform_spec);

  ICPParams params;
  params.max_correspondence_dist = 0.05;
  const ICPResult result = icp_align(source, deformed.cloud,
                                     RigidTransform::identity(), params);
  CHECK(result.converged);

  const double before =
      dcd(source, deformed.cloud, DCDParams{100.0});
  const double after = dcd(apply_transform(source, result.transform),
                           deformed.cloud, DCDParams{100.0});
  CHECK(after < before);
}

TEST_CASE("icp_align is invariant to a common rigid motion") {
  ShapeSpec spec;
  spec.n_points = 800;
  spec.seed = 35;
  const PointCloud source = sample_shape(spec);
  Rng rng(36);
  const RigidTransform truth = random_rigid(rng, 0.2, 0.02);
  const PointCloud target = apply_transform(source, truth);
  const RigidTransform init = random_rigid(rng, 0.05, 0.005) * truth;

  ICPParams params;
  params.max_correspondence_dist = 0.05;
  const ICPResult base = icp_align(source, target, init, params);

  const RigidTransform motion = random_rigid(rng, 1.0, 0.5);
  const ICPResult moved =
      icp_align(apply_transform(source, motion), apply_transform(target, motion),
                motion * init * motion.inverse(), params);
  CHECK(std::abs(base.rmse - moved.rmse) <= 1e-9);
  CHECK(base.iterations == moved.iterations);
}

TEST_CASE("icp_align errors when every correspondence is rejected") {
  PointCloud source;
  source.points.emplace_back(0, 0, 0);
  source.points.emplace_back(0.01, 0, 0);
  PointCloud target;
  target.points.emplace_back(5, 5, 5);
  target.points.emplace_back(5.01, 5, 5);
  ICPParams params;
  params.max_correspondence_dist = 0.01;
  CHECK_THROWS_WITH_AS(
      icp_align(source, target, RigidTransform::identity(), params),
      doctest::Contains("increase max_correspondence_dist"),
      std::runtime_error);
}

TEST_CASE("icp_align validates parameters") {
  PointCloud cloud;
  cloud.points.emplace_back(0, 0, 0);
  ICPParams bad;
  bad.max_iterations = 0;
  CHECK_THROWS_AS(icp_align(cloud, cloud, RigidTransform::identity(), bad),
                  std::invalid_argument);
  RigidTransform crooked;
  crooked.rotation(0, 0) = 2.0;
  CHECK_THROWS_AS(icp_align(cloud, cloud, crooked, ICPParams{}),
                  std::invalid_argument);
}

TEST_CASE("pca_align is the identity on itself") {
  const PointCloud cloud = asymmetric_blob(41, 500);
  const RigidTransform t = pca_align(cloud, cloud);
  CHECK(rotation_error(t, RigidTransform::identity()) <= 1e-9);
  CHECK(t.translation.norm() <= 1e-9);
  CHECK(is_rigid(t));
}

TEST_CASE("pca_align recovers a rotation of an asymmetric cloud") {
  const PointCloud source = asymmetric_blob(42, 800);
  const RigidTransform truth =
      rotation_about_z(45.0 * std::numbers::pi / 180.0, {0.01, 0.02, -0.01});
  const PointCloud target = apply_transform(source, truth);
  const RigidTransform recovered = pca_align(source, target);
  CHECK(rotation_error(recovered, truth) <= 1e-6);
  CHECK((recovered.translation - truth.translation).norm() <= 1e-7);
}

TEST_CASE("pca_align centroids coincide for a squashed symmetric box") {
  ShapeSpec spec;
  spec.n_points = 1200;
  spec.seed = 43;
  const PointCloud box = sample_shape(spec);
  DeformSpec squash;
  squash.squash_ratio = 0.7;
  const DeformResult grasped = deform(box, squash);

  const RigidTransform t = pca_align(box, grasped.cloud);
  const PointCloud aligned = apply_transform(box, t);
  CHECK((centroid(aligned) - centroid(grasped.cloud)).norm() <= 1e-9);
  CHECK(is_rigid(t));
}

TEST_CASE("pca_align rejects rank-deficient geometry") {
  PointCloud plane_free_line;
  for (int i = 0; i < 30; ++i) {
    plane_free_line.points.emplace_back(0.01 * i, 0.0, 0.0);
  }
  CHECK_THROWS_WITH_AS(pca_align(plane_free_line, plane_free_line),
                       doctest::Contains("degenerate geometry"),
                       std::invalid_argument);
}

TEST_CASE("nn_rmse measures residual point-to-point distance") {
  PointCloud target;
  target.points.emplace_back(0, 0, 0);
  target.points.emplace_back(1, 0, 0);
  PointCloud query;
  query.points.emplace_back(0.003, 0, 0);
  query.points.emplace_back(1.004, 0, 0);
  const double rmse = nn_rmse(query, NNIndex(target));
  CHECK(rmse == doctest::Approx(std::sqrt((0.003 * 0.003 + 0.004 * 0.004) / 2.0))
                    .epsilon(1e-12));
}
