#include "sograb/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "sograb/rng.hpp"

namespace sograb {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string("sample_shape: ") + what +
                                " must be > 0");
  }
}

PointCloud sample_box(const Eigen::Vector3d& dims, int n_points, Rng& rng) {
  const Eigen::Vector3d h = dims / 2.0;
  // Face order: +x, -x, +y, -y, +z, -z.
  const double area_x = dims.y() * dims.z();
  const double area_y = dims.x() * dims.z();
  const double area_z = dims.x() * dims.y();
  const double areas[6] = {area_x, area_x, area_y, area_y, area_z, area_z};
  double cumulative[6];
  double total = 0.0;
  for (int f = 0; f < 6; ++f) {
    total += areas[f];
    cumulative[f] = total;
  }

  PointCloud cloud;
  cloud.points.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double pick = rng.uniform() * total;
    int face = 0;
    while (face < 5 && pick >= cumulative[face]) ++face;
    const double a = rng.uniform();
    const double b = rng.uniform();
    Point3 p;
    switch (face) {
      case 0: p = { h.x(), (a - 0.5) * dims.y(), (b - 0.5) * dims.z()}; break;
      case 1: p = {-h.x(), (a - 0.5) * dims.y(), (b - 0.5) * dims.z()}; break;
      case 2: p = {(a - 0.5) * dims.x(),  h.y(), (b - 0.5) * dims.z()}; break;
      case 3: p = {(a - 0.5) * dims.x(), -h.y(), (b - 0.5) * dims.z()}; break;
      case 4: p = {(a - 0.5) * dims.x(), (b - 0.5) * dims.y(),  h.z()}; break;
      default: p = {(a - 0.5) * dims.x(), (b - 0.5) * dims.y(), -h.z()}; break;
    }
    cloud.points.push_back(p);
  }
  return cloud;
}

PointCloud sample_cylinder(double radius, double height, int n_points,
                           Rng& rng) {
  const double side_area = kTau * radius * height;
  const double cap_area = std::numbers::pi * radius * radius;
  const double total = side_area + 2.0 * cap_area;

  PointCloud cloud;
  cloud.points.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double pick = rng.uniform() * total;
    const double a = rng.uniform();
    const double b = rng.uniform();
    if (pick < side_area) {
      const double angle = kTau * a;
      cloud.points.emplace_back(radius * std::cos(angle),
                                radius * std::sin(angle),
                                (b - 0.5) * height);
    } else {
      const double rho = radius * std::sqrt(a);
      const double angle = kTau * b;
      const double z = pick < side_area + cap_area ? height / 2.0
                                                   : -height / 2.0;
      cloud.points.emplace_back(rho * std::cos(angle), rho * std::sin(angle),
                                z);
    }
  }
  return cloud;
}

PointCloud sample_sphere(double radius, int n_points, Rng& rng) {
  PointCloud cloud;
  cloud.points.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double z = 2.0 * rng.uniform() - 1.0;
    const double angle = kTau * rng.uniform();
    const double ring = std::sqrt(std::max(0.0, 1.0 - z * z));
    cloud.points.emplace_back(radius * ring * std::cos(angle),
                              radius * ring * std::sin(angle), radius * z);
  }
  return cloud;
}

// Closed radial spline: random control radii over half the circle, mirrored
// onto the other half (so the outline is symmetric about the xz plane), then
// interpolated with a periodic Catmull-Rom cubic and extruded along z.
class SplineOutline {
 public:
  SplineOutline(double base_radius, Rng& rng) {
    constexpr int kHalfControls = 6;  // angles 0..pi inclusive
    std::vector<double> half(kHalfControls);
    for (double& r : half) {
      r = base_radius * (1.0 + 0.3 * rng.uniform(-1.0, 1.0));
    }
    control_.resize(2 * (kHalfControls - 1));
    for (int k = 0; k < kHalfControls; ++k) control_[k] = half[k];
    for (int k = kHalfControls; k < static_cast<int>(control_.size()); ++k) {
      control_[k] = half[2 * (kHalfControls - 1) - k];
    }
  }

  double radius(double angle) const {
    const int m = static_cast<int>(control_.size());
    double t = angle / kTau * m;
    t -= std::floor(t / m) * m;
    const int k = std::min(static_cast<int>(t), m - 1);
    const double s = t - k;
    const double c0 = control_[(k + m - 1) % m];
    const double c1 = control_[k];
    const double c2 = control_[(k + 1) % m];
    const double c3 = control_[(k + 2) % m];
    const double m1 = (c2 - c0) / 2.0;
    const double m2 = (c3 - c1) / 2.0;
    const double s2 = s * s;
    const double s3 = s2 * s;
    return (2.0 * s3 - 3.0 * s2 + 1.0) * c1 + (s3 - 2.0 * s2 + s) * m1 +
           (-2.0 * s3 + 3.0 * s2) * c2 + (s3 - s2) * m2;
  }

  // Plain scalars on purpose: the per-seed output must not change with the
  // optimizer's choice of vector instructions.
  void point(double angle, double& x, double& y) const {
    const double r = radius(angle);
    x = r * std::cos(angle);
    y = r * std::sin(angle);
  }

 private:
  std::vector<double> control_;
};

PointCloud sample_extruded_spline(double base_radius, double height,
                                  int n_points, Rng& rng) {
  const SplineOutline outline(base_radius, rng);

  // Arc-length table over a dense angular grid, for uniform sampling along
  // the outline.
  constexpr int kGrid = 4096;
  std::vector<double> cumulative(kGrid + 1, 0.0);
  double prev_x, prev_y;
  outline.point(0.0, prev_x, prev_y);
  for (int i = 1; i <= kGrid; ++i) {
    double x, y;
    outline.point(kTau * i / kGrid, x, y);
    const double dx = x - prev_x;
    const double dy = y - prev_y;
    cumulative[i] = cumulative[i - 1] + std::sqrt(dx * dx + dy * dy);
    prev_x = x;
    prev_y = y;
  }
  const double total = cumulative[kGrid];

  PointCloud cloud;
  cloud.points.reserve(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double s = rng.uniform() * total;
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), s);
    const int seg = std::max(
        0, static_cast<int>(std::distance(cumulative.begin(), it)) - 1);
    const int clamped = std::min(seg, kGrid - 1);
    const double span = cumulative[clamped + 1] - cumulative[clamped];
    const double frac = span > 0.0 ? (s - cumulative[clamped]) / span : 0.0;
    const double angle = kTau * (clamped + frac) / kGrid;
    double x, y;
    outline.point(angle, x, y);
    const double z = (rng.uniform() - 0.5) * height;
    cloud.points.emplace_back(x, y, z);
  }
  return cloud;
}

}  // namespace

PointCloud sample_shape(const ShapeSpec& spec) {
  if (spec.n_points < 10) {
    throw std::invalid_argument("sample_shape: n_points must be >= 10");
  }
  Rng rng(spec.seed);
  switch (spec.kind) {
    case ShapeKind::kBox:
      require_positive(spec.dimensions.x(), "box x extent");
      require_positive(spec.dimensions.y(), "box y extent");
      require_positive(spec.dimensions.z(), "box z extent");
      return sample_box(spec.dimensions, spec.n_points, rng);
    case ShapeKind::kCylinder:
      require_positive(spec.dimensions.x(), "cylinder radius");
      require_positive(spec.dimensions.y(), "cylinder height");
      return sample_cylinder(spec.dimensions.x(), spec.dimensions.y(),
                             spec.n_points, rng);
    case ShapeKind::kSphere:
      require_positive(spec.dimensions.x(), "sphere radius");
      return sample_sphere(spec.dimensions.x(), spec.n_points, rng);
    case ShapeKind::kExtrudedSpline:
      require_positive(spec.dimensions.x(), "spline base radius");
      require_positive(spec.dimensions.y(), "extrusion height");
      return sample_extruded_spline(spec.dimensions.x(), spec.dimensions.y(),
                                    spec.n_points, rng);
  }
  throw std::invalid_argument("sample_shape: unknown shape kind");
}

DeformResult deform(const PointCloud& cloud, const DeformSpec& spec) {
  if (cloud.empty()) throw std::invalid_argument("deform: empty cloud");
  if (!(spec.squash_ratio > 0.0) || spec.squash_ratio > 1.0) {
    throw std::invalid_argument("deform: squash_ratio must lie in (0, 1]");
  }
  if (spec.noise_sigma < 0.0) {
    throw std::invalid_argument("deform: noise_sigma must be >= 0");
  }
  validate_rigid(spec.rigid_motion);

  const double axis_norm = spec.squash_axis.norm();
  if (!(axis_norm > 0.0)) {
    throw std::invalid_argument("deform: squash_axis must be non-zero");
  }
  const Eigen::Vector3d axis = spec.squash_axis / axis_norm;
  const Eigen::Matrix3d squash =
      Eigen::Matrix3d::Identity() +
      (spec.squash_ratio - 1.0) * axis * axis.transpose();
  const bool identity_motion =
      spec.rigid_motion.rotation.isIdentity(0.0) &&
      spec.rigid_motion.translation.isZero(0.0);
  const Point3 center = centroid(cloud);

  PointCloud out;
  out.points.reserve(cloud.size());
  const bool with_colors = cloud.has_colors();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    // ratio 1 and an identity motion pass coordinates through untouched.
    const Point3 squashed =
        spec.squash_ratio == 1.0
            ? cloud.points[i]
            : Point3(center + squash * (cloud.points[i] - center));
    const Point3 moved =
        identity_motion ? squashed : spec.rigid_motion.apply(squashed);
    if (spec.occlusion &&
        spec.occlusion->normal.dot(moved) > spec.occlusion->offset) {
      continue;
    }
    out.points.push_back(moved);
    if (with_colors) out.colors.push_back(cloud.colors[i]);
  }
  if (out.empty()) {
    throw std::runtime_error("deform: occlusion removed all points");
  }

  if (spec.noise_sigma > 0.0) {
    Rng rng(spec.noise_seed);
    for (Point3& p : out.points) {
      p.x() += spec.noise_sigma * rng.normal();
      p.y() += spec.noise_sigma * rng.normal();
      p.z() += spec.noise_sigma * rng.normal();
    }
  }
  return DeformResult{std::move(out), spec.rigid_motion};
}

}  // namespace sograb
