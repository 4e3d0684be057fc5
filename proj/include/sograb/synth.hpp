#pragma once

#include <cstdint>
#include <optional>

#include "sograb/point_cloud.hpp"
#include "sograb/transform.hpp"

namespace sograb {

enum class ShapeKind { kBox, kCylinder, kSphere, kExtrudedSpline };

// Surface-sampled test shape. dimensions is interpreted per kind:
//   box             edge lengths (x, y, z)
//   cylinder        [radius, height]
//   sphere          [radius]
//   extruded-spline [base radius, extrusion height]
struct ShapeSpec {
  ShapeKind kind = ShapeKind::kBox;
  Eigen::Vector3d dimensions{0.055, 0.055, 0.055};  // meters
  int n_points = 2000;
  std::uint64_t seed = 0;
};

// Points with normal . p > offset are dropped.
struct HalfSpace {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double offset = 0.0;
};

// Idealized grasp deformation: a linear squash along one axis about the
// centroid, followed by a rigid motion, an optional occlusion cut, and
// optional isotropic Gaussian noise.
struct DeformSpec {
  Eigen::Vector3d squash_axis = Eigen::Vector3d::UnitZ();
  double squash_ratio = 1.0;  // in (0, 1]; 1 = no squash
  RigidTransform rigid_motion;
  std::optional<HalfSpace> occlusion;
  double noise_sigma = 0.0;  // meters
  std::uint64_t noise_seed = 0;
};

struct DeformResult {
  PointCloud cloud;
  RigidTransform ground_truth;  // the rigid motion that was applied
};

// Uniform surface sampling, deterministic for a fixed seed. The extruded
// spline is a random closed radial spline mirrored about the xz plane and
// extruded along z, so the cloud is bilaterally symmetric in y.
PointCloud sample_shape(const ShapeSpec& spec);

// Applies the deformation and returns the rigid motion as ground truth for
// alignment tests. Throws if the occlusion removes every point.
DeformResult deform(const PointCloud& cloud, const DeformSpec& spec);

}  // namespace sograb
