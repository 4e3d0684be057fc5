#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>

#include "sograb/alignment.hpp"
#include "sograb/metric.hpp"
#include "sograb/pipeline.hpp"
#include "sograb/ply_io.hpp"
#include "sograb/point_cloud.hpp"
#include "sograb/report.hpp"
#include "sograb/synth.hpp"
#include "sograb/transform.hpp"

namespace py = pybind11;
using namespace sograb;

namespace {

PointCloud cloud_from_arrays(
    const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
    const std::optional<py::array_t<std::uint8_t,
                                    py::array::c_style | py::array::forcecast>>&
        colors) {
  if (points.ndim() != 2 || points.shape(1) != 3) {
    throw std::invalid_argument("points must be an (N, 3) array");
  }
  PointCloud cloud;
  const auto n = points.shape(0);
  cloud.points.reserve(static_cast<std::size_t>(n));
  const auto view = points.unchecked<2>();
  for (py::ssize_t i = 0; i < n; ++i) {
    cloud.points.emplace_back(view(i, 0), view(i, 1), view(i, 2));
  }
  if (colors) {
    if (colors->ndim() != 2 || colors->shape(1) != 3 || colors->shape(0) != n) {
      throw std::invalid_argument("colors must be an (N, 3) uint8 array");
    }
    const auto cview = colors->unchecked<2>();
    cloud.colors.reserve(static_cast<std::size_t>(n));
    for (py::ssize_t i = 0; i < n; ++i) {
      cloud.colors.push_back(Color{cview(i, 0), cview(i, 1), cview(i, 2)});
    }
  }
  return cloud;
}

py::array_t<double> points_array(const PointCloud& cloud) {
  py::array_t<double> out({static_cast<py::ssize_t>(cloud.size()),
                           static_cast<py::ssize_t>(3)});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    view(i, 0) = cloud.points[i].x();
    view(i, 1) = cloud.points[i].y();
    view(i, 2) = cloud.points[i].z();
  }
  return out;
}

py::object colors_array(const PointCloud& cloud) {
  if (!cloud.has_colors()) return py::none();
  py::array_t<std::uint8_t> out({static_cast<py::ssize_t>(cloud.size()),
                                 static_cast<py::ssize_t>(3)});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    view(i, 0) = cloud.colors[i][0];
    view(i, 1) = cloud.colors[i][1];
    view(i, 2) = cloud.colors[i][2];
  }
  return out;
}

PlyFormat parse_format(const std::string& name) {
  if (name == "binary" || name == "binary_little_endian") {
    return PlyFormat::kBinaryLittleEndian;
  }
  if (name == "ascii") return PlyFormat::kAscii;
  throw std::invalid_argument("format must be 'binary' or 'ascii'");
}

ShapeKind parse_kind(const std::string& name) {
  if (name == "box") return ShapeKind::kBox;
  if (name == "cylinder") return ShapeKind::kCylinder;
  if (name == "sphere") return ShapeKind::kSphere;
  if (name == "extruded-spline" || name == "extruded_spline") {
    return ShapeKind::kExtrudedSpline;
  }
  throw std::invalid_argument("unknown shape kind '" + name + "'");
}

GraspOutcome outcome_from_args(const std::string& outcome,
                               std::optional<double> t_dropped,
                               std::optional<double> t_cycle) {
  if (outcome == "unsuccessful") return GraspOutcome::unsuccessful();
  if (outcome == "successful") return GraspOutcome::successful();
  if (outcome == "partial") {
    if (!t_dropped || !t_cycle) {
      throw std::invalid_argument(
          "partial outcome needs t_dropped and t_cycle");
    }
    return GraspOutcome::partial(*t_dropped, *t_cycle);
  }
  throw std::invalid_argument("unknown outcome '" + outcome + "'");
}

py::dict record_dict(const ScoreRecord& record) {
  py::dict out;
  out["trial_id"] = record.trial_id;
  out["dcd"] = record.dcd_value ? py::cast(*record.dcd_value) : py::none();
  out["score"] = record.score.value;
  out["alignment_rmse"] =
      record.alignment_rmse ? py::cast(*record.alignment_rmse) : py::none();
  out["alignment_mode"] =
      record.alignment_mode
          ? py::cast(std::string(alignment_mode_name(*record.alignment_mode)))
          : py::none();
  out["alpha"] = record.alpha;
  return out;
}

}  // namespace

PYBIND11_MODULE(_sograb, m) {
  m.doc() = "soft-grasp benchmarking: density-aware chamfer distance, "
            "alignment and batch scoring";

  py::class_<PointCloud>(m, "PointCloud")
      .def(py::init(&cloud_from_arrays), py::arg("points"),
           py::arg("colors") = std::nullopt)
      .def_property_readonly("points", &points_array)
      .def_property_readonly("colors", &colors_array)
      .def("__len__", &PointCloud::size)
      .def("__repr__", [](const PointCloud& c) {
        return "PointCloud(" + std::to_string(c.size()) + " points" +
               (c.has_colors() ? ", with colors)" : ")");
      });

  py::class_<RigidTransform>(m, "RigidTransform")
      .def(py::init([](const Eigen::Matrix3d& rotation,
                       const Eigen::Vector3d& translation) {
             RigidTransform t{rotation, translation};
             validate_rigid(t);
             return t;
           }),
           py::arg("rotation"), py::arg("translation"))
      .def_static("identity", &RigidTransform::identity)
      .def_readonly("rotation", &RigidTransform::rotation)
      .def_readonly("translation", &RigidTransform::translation)
      .def("inverse", &RigidTransform::inverse)
      .def("__matmul__",
           [](const RigidTransform& a, const RigidTransform& b) { return a * b; })
      .def("__repr__", [](const RigidTransform& t) {
        return "RigidTransform(" + transform_to_json(t) + ")";
      });

  py::class_<ICPResult>(m, "ICPResult")
      .def_readonly("transform", &ICPResult::transform)
      .def_readonly("rmse", &ICPResult::rmse)
      .def_readonly("iterations", &ICPResult::iterations)
      .def_readonly("converged", &ICPResult::converged)
      .def_readonly("rmse_history", &ICPResult::rmse_history);

  m.def("load_cloud", &load_cloud, py::arg("path"));
  m.def(
      "save_cloud",
      [](const PointCloud& cloud, const std::string& path,
         const std::string& format) {
        save_cloud(cloud, path, parse_format(format));
      },
      py::arg("cloud"), py::arg("path"), py::arg("format") = "binary");

  m.def("voxel_downsample", &voxel_downsample, py::arg("cloud"),
        py::arg("voxel_size"));
  m.def(
      "segment_by_color",
      [](const PointCloud& cloud, int min_brightness, int max_chroma_spread,
         std::optional<Eigen::Vector3d> crop_min,
         std::optional<Eigen::Vector3d> crop_max) {
        SegmentationParams params;
        params.min_brightness = min_brightness;
        params.max_chroma_spread = max_chroma_spread;
        if (crop_min && crop_max) {
          params.crop_box = AxisAlignedBox{*crop_min, *crop_max};
        }
        return segment_by_color(cloud, params);
      },
      py::arg("cloud"), py::arg("min_brightness") = 128,
      py::arg("max_chroma_spread") = 40, py::arg("crop_min") = std::nullopt,
      py::arg("crop_max") = std::nullopt);
  m.def("centroid", &centroid, py::arg("cloud"));
  m.def("covariance", &covariance, py::arg("cloud"));
  m.def("apply_transform", &apply_transform, py::arg("cloud"),
        py::arg("transform"));

  m.def(
      "dcd",
      [](const PointCloud& s1, const PointCloud& s2, double alpha) {
        return dcd(s1, s2, DCDParams{alpha});
      },
      py::arg("s1"), py::arg("s2"), py::arg("alpha") = 100.0,
      "Density-aware chamfer distance in [0, 1].");
  m.def(
      "one_sided_dcd",
      [](const PointCloud& reference, const PointCloud& target, double alpha) {
        return one_sided_dcd(reference, NNIndex(target), alpha);
      },
      py::arg("reference"), py::arg("target"), py::arg("alpha") = 100.0);
  m.def(
      "grasp_score",
      [](const std::string& outcome, std::optional<double> d,
         std::optional<double> t_dropped, std::optional<double> t_cycle) {
        return grasp_score(outcome_from_args(outcome, t_dropped, t_cycle), d)
            .value;
      },
      py::arg("outcome"), py::arg("d") = std::nullopt,
      py::arg("t_dropped") = std::nullopt, py::arg("t_cycle") = std::nullopt,
      "Grasp score in [0, 1] from outcome and deformation distance.");

  m.def(
      "icp_align",
      [](const PointCloud& source, const PointCloud& target,
         std::optional<RigidTransform> init, int max_iterations,
         double convergence_tol, double max_correspondence_dist) {
        ICPParams params;
        params.max_iterations = max_iterations;
        params.convergence_tol = convergence_tol;
        params.max_correspondence_dist = max_correspondence_dist;
        return icp_align(source, target,
                         init.value_or(RigidTransform::identity()), params);
      },
      py::arg("source"), py::arg("target"), py::arg("init") = std::nullopt,
      py::arg("max_iterations") = 50, py::arg("convergence_tol") = 1e-6,
      py::arg("max_correspondence_dist") = 0.01);
  m.def("pca_align", &pca_align, py::arg("source"), py::arg("target"));

  m.def(
      "sample_shape",
      [](const std::string& kind, const Eigen::Vector3d& dimensions,
         int n_points, std::uint64_t seed) {
        ShapeSpec spec;
        spec.kind = parse_kind(kind);
        spec.dimensions = dimensions;
        spec.n_points = n_points;
        spec.seed = seed;
        return sample_shape(spec);
      },
      py::arg("kind") = "box",
      py::arg("dimensions") = Eigen::Vector3d(0.055, 0.055, 0.055),
      py::arg("n_points") = 2000, py::arg("seed") = 0);
  m.def(
      "deform",
      [](const PointCloud& cloud, double squash_ratio,
         const Eigen::Vector3d& squash_axis,
         std::optional<RigidTransform> rigid_motion,
         std::optional<std::pair<Eigen::Vector3d, double>> occlusion,
         double noise_sigma, std::uint64_t noise_seed) {
        DeformSpec spec;
        spec.squash_ratio = squash_ratio;
        spec.squash_axis = squash_axis;
        spec.rigid_motion = rigid_motion.value_or(RigidTransform::identity());
        if (occlusion) {
          spec.occlusion = HalfSpace{occlusion->first, occlusion->second};
        }
        spec.noise_sigma = noise_sigma;
        spec.noise_seed = noise_seed;
        DeformResult result = deform(cloud, spec);
        return py::make_tuple(result.cloud, result.ground_truth);
      },
      py::arg("cloud"), py::arg("squash_ratio") = 1.0,
      py::arg("squash_axis") = Eigen::Vector3d(0, 0, 1),
      py::arg("rigid_motion") = std::nullopt,
      py::arg("occlusion") = std::nullopt, py::arg("noise_sigma") = 0.0,
      py::arg("noise_seed") = 0,
      "Returns (deformed_cloud, ground_truth_transform).");

  m.def(
      "run_batch",
      [](const std::string& manifest_path, std::optional<std::string> out_dir,
         std::optional<double> alpha, std::optional<double> voxel_size,
         int parallel) {
        const Manifest manifest = load_manifest(manifest_path);
        PipelineConfig config;
        if (manifest.alpha) config.alpha = *manifest.alpha;
        if (alpha) config.alpha = *alpha;
        if (voxel_size) config.voxel_size = *voxel_size;
        config.parallelism = parallel;
        const BatchResult batch = run_batch(manifest, config);
        const auto cells = aggregate(batch.records, manifest);
        if (out_dir) {
          export_results(batch.records, cells, manifest, config, *out_dir);
        }
        py::list records;
        for (const auto& record : batch.records) {
          records.append(record_dict(record));
        }
        py::list errors;
        for (const auto& error : batch.errors) {
          py::dict e;
          e["trial_id"] = error.trial_id;
          e["message"] = error.message;
          errors.append(e);
        }
        py::dict out;
        out["records"] = records;
        out["errors"] = errors;
        out["cells"] = cells.size();
        return out;
      },
      py::arg("manifest_path"), py::arg("out_dir") = std::nullopt,
      py::arg("alpha") = std::nullopt, py::arg("voxel_size") = std::nullopt,
      py::arg("parallel") = 0,
      "Evaluates a manifest; optionally writes scores.csv, aggregate.csv and "
      "heatmap.svg.");
}
