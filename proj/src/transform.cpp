#include "sograb/transform.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <stdexcept>

#include "json_util.hpp"

namespace sograb {

bool is_rigid(const RigidTransform& t, double tol) {
  if (!t.rotation.allFinite() || !t.translation.allFinite()) return false;
  const Eigen::Matrix3d gram_error =
      t.rotation.transpose() * t.rotation - Eigen::Matrix3d::Identity();
  if (gram_error.cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(t.rotation.determinant() - 1.0) <= tol;
}

void validate_rigid(const RigidTransform& t) {
  if (!is_rigid(t)) {
    throw std::invalid_argument(
        "transform is not a proper rigid motion (rotation must be orthonormal "
        "with determinant +1)");
  }
}

RigidTransform orthonormalized(const RigidTransform& t) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(
      t.rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  const Eigen::Matrix3d v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    u.col(2) *= -1.0;
  }
  RigidTransform out;
  out.rotation = u * v.transpose();
  out.translation = t.translation;
  return out;
}

double rotation_angle_between(const RigidTransform& a,
                              const RigidTransform& b) {
  const Eigen::Matrix3d rel = a.rotation.transpose() * b.rotation;
  // atan2 of (2 sin, 2 cos) of the angle; exact for tiny angles where acos
  // of the trace loses all precision.
  const Eigen::Vector3d skew(rel(2, 1) - rel(1, 2), rel(0, 2) - rel(2, 0),
                             rel(1, 0) - rel(0, 1));
  return std::atan2(skew.norm(), rel.trace() - 1.0);
}

PointCloud apply_transform(const PointCloud& cloud, const RigidTransform& t) {
  PointCloud out;
  out.points.reserve(cloud.size());
  for (const auto& p : cloud.points) {
    out.points.push_back(t.apply(p));
  }
  out.colors = cloud.colors;
  return out;
}

namespace detail {

RigidTransform transform_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("rotation") || !j.contains("translation")) {
    throw std::runtime_error(
        "unparsable transform: expected {\"rotation\": [9], \"translation\": "
        "[3]}");
  }
  const auto& rot = j.at("rotation");
  const auto& trans = j.at("translation");
  if (!rot.is_array() || rot.size() != 9 || !trans.is_array() ||
      trans.size() != 3) {
    throw std::runtime_error(
        "unparsable transform: rotation needs 9 numbers (row-major), "
        "translation needs 3");
  }
  RigidTransform t;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      t.rotation(r, c) = rot.at(3 * r + c).get<double>();
    }
    t.translation(r) = trans.at(r).get<double>();
  }
  validate_rigid(t);
  return t;
}

nlohmann::json transform_to_json_obj(const RigidTransform& t) {
  nlohmann::json rot = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) rot.push_back(t.rotation(r, c));
  }
  return nlohmann::json{
      {"rotation", rot},
      {"translation", {t.translation.x(), t.translation.y(), t.translation.z()}}};
}

}  // namespace detail

std::string transform_to_json(const RigidTransform& t) {
  return detail::transform_to_json_obj(t).dump();
}

RigidTransform transform_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("unparsable transform: ") + e.what());
  }
  return detail::transform_from_json(j);
}

RigidTransform load_transform(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open file");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  try {
    return transform_from_json_text(text);
  } catch (const std::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void save_transform(const RigidTransform& t, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open file for writing");
  out << transform_to_json(t) << "\n";
  if (!out) throw std::runtime_error(path + ": write failed");
}

}  // namespace sograb
