#pragma once

#include <Eigen/Core>
#include <string>

#include "sograb/point_cloud.hpp"

namespace sograb {

// Proper rigid motion: p -> rotation * p + translation.
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  static RigidTransform identity() { return {}; }

  Point3 apply(const Point3& p) const { return rotation * p + translation; }

  RigidTransform inverse() const {
    RigidTransform inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }
};

// a * b applies b first, then a.
inline RigidTransform operator*(const RigidTransform& a,
                                const RigidTransform& b) {
  RigidTransform out;
  out.rotation = a.rotation * b.rotation;
  out.translation = a.rotation * b.translation + a.translation;
  return out;
}

// max |R^T R - I| <= tol and det(R) within tol of +1.
bool is_rigid(const RigidTransform& t, double tol = 1e-9);

// Throws std::invalid_argument if the rotation is not a proper rotation.
void validate_rigid(const RigidTransform& t);

// Projects the rotation onto the nearest proper rotation (SVD); used to stop
// drift when composing many incremental transforms.
RigidTransform orthonormalized(const RigidTransform& t);

// Angle in radians of the relative rotation between two transforms.
double rotation_angle_between(const RigidTransform& a, const RigidTransform& b);

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t);

// JSON wire format: {"rotation": [9 floats, row-major], "translation": [3]}.
std::string transform_to_json(const RigidTransform& t);
RigidTransform transform_from_json_text(const std::string& text);
RigidTransform load_transform(const std::string& path);
void save_transform(const RigidTransform& t, const std::string& path);

}  // namespace sograb
