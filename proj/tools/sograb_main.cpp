// sograb command-line frontend: score, align, batch and synth subcommands.

#include <CLI11.hpp>
#include <Eigen/Geometry>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "sograb/alignment.hpp"
#include "sograb/metric.hpp"
#include "sograb/numfmt.hpp"
#include "sograb/pipeline.hpp"
#include "sograb/ply_io.hpp"
#include "sograb/report.hpp"
#include "sograb/rng.hpp"
#include "sograb/synth.hpp"
#include "sograb/transform.hpp"

namespace {

using nlohmann::json;
using namespace sograb;

// Config sources in increasing precedence: defaults, manifest alpha,
// --config file, explicit flags.
struct ConfigFlags {
  std::string config_path;
  double alpha = 0.0;
  bool alpha_set = false;
  double voxel_size = 0.0;
  bool voxel_set = false;
  bool segment = false;
  int seg_min_brightness = 128;
  bool seg_min_set = false;
  int seg_max_chroma = 40;
  bool seg_max_set = false;
  int icp_max_iterations = 0;
  bool icp_iters_set = false;
  double icp_tol = 0.0;
  bool icp_tol_set = false;
  double icp_max_dist = 0.0;
  bool icp_dist_set = false;
  bool auto_pca = false;
  double pca_fallback_rmse = 0.0;
  bool pca_fallback_set = false;
  int parallel = 0;
  bool parallel_set = false;
};

void add_config_flags(CLI::App* cmd, ConfigFlags& flags) {
  cmd->add_option("--config", flags.config_path,
                  "JSON config file (flags take precedence)");
  cmd->add_option("--alpha", flags.alpha,
                  "DCD sensitivity in 1/m (default 100)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--voxel-size", flags.voxel_size,
                  "voxel downsampling edge length in meters (off by default)")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--segment", flags.segment,
                "segment the object out of the scene by color first");
  cmd->add_option("--seg-min-brightness", flags.seg_min_brightness,
                  "segmentation brightness threshold, 0-255 (default 128)");
  cmd->add_option("--seg-max-chroma", flags.seg_max_chroma,
                  "segmentation chroma spread threshold, 0-255 (default 40)");
  cmd->add_option("--icp-max-iterations", flags.icp_max_iterations,
                  "ICP iteration budget (default 50)");
  cmd->add_option("--icp-tol", flags.icp_tol,
                  "ICP convergence tolerance on RMSE change, m (default 1e-6)");
  cmd->add_option("--icp-max-dist", flags.icp_max_dist,
                  "ICP correspondence rejection distance, m (default 10x "
                  "voxel size, or 10 mm)");
  cmd->add_flag("--auto-pca-fallback", flags.auto_pca,
                "fall back to PCA alignment when ICP RMSE exceeds the "
                "threshold");
  cmd->add_option("--pca-fallback-rmse", flags.pca_fallback_rmse,
                  "RMSE threshold for the PCA fallback, m (default 5e-3)");
  cmd->add_option("--parallel", flags.parallel,
                  "worker threads for batch evaluation (default: #cpus); "
                  "results are identical at any level");
}

void mark_presence(const CLI::App* cmd, ConfigFlags& flags) {
  flags.alpha_set = cmd->count("--alpha") > 0;
  flags.voxel_set = cmd->count("--voxel-size") > 0;
  flags.seg_min_set = cmd->count("--seg-min-brightness") > 0;
  flags.seg_max_set = cmd->count("--seg-max-chroma") > 0;
  flags.icp_iters_set = cmd->count("--icp-max-iterations") > 0;
  flags.icp_tol_set = cmd->count("--icp-tol") > 0;
  flags.icp_dist_set = cmd->count("--icp-max-dist") > 0;
  flags.pca_fallback_set = cmd->count("--pca-fallback-rmse") > 0;
  flags.parallel_set = cmd->count("--parallel") > 0;
}

void apply_config_file(const std::string& path, PipelineConfig& config) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open config file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (j.contains("alpha")) config.alpha = j.at("alpha").get<double>();
  if (j.contains("voxel_size")) {
    config.voxel_size = j.at("voxel_size").get<double>();
  }
  if (j.contains("segmentation") && !j.at("segmentation").is_null()) {
    const json& seg = j.at("segmentation");
    SegmentationParams params;
    if (seg.contains("min_brightness")) {
      params.min_brightness = seg.at("min_brightness").get<int>();
    }
    if (seg.contains("max_chroma_spread")) {
      params.max_chroma_spread = seg.at("max_chroma_spread").get<int>();
    }
    if (seg.contains("crop_box") && !seg.at("crop_box").is_null()) {
      AxisAlignedBox box;
      for (int k = 0; k < 3; ++k) {
        box.min(k) = seg.at("crop_box").at("min").at(k).get<double>();
        box.max(k) = seg.at("crop_box").at("max").at(k).get<double>();
      }
      params.crop_box = box;
    }
    config.segmentation = params;
  }
  if (j.contains("icp")) {
    const json& icp = j.at("icp");
    if (icp.contains("max_iterations")) {
      config.icp.max_iterations = icp.at("max_iterations").get<int>();
    }
    if (icp.contains("convergence_tol")) {
      config.icp.convergence_tol = icp.at("convergence_tol").get<double>();
    }
    if (icp.contains("max_correspondence_dist")) {
      config.icp.max_correspondence_dist =
          icp.at("max_correspondence_dist").get<double>();
      config.icp_dist_explicit = true;
    }
  }
  if (j.contains("auto_pca_fallback")) {
    config.auto_pca_fallback = j.at("auto_pca_fallback").get<bool>();
  }
  if (j.contains("pca_fallback_rmse")) {
    config.pca_fallback_rmse = j.at("pca_fallback_rmse").get<double>();
  }
  if (j.contains("parallel")) config.parallelism = j.at("parallel").get<int>();
}

PipelineConfig resolve_config(const ConfigFlags& flags,
                              std::optional<double> manifest_alpha) {
  PipelineConfig config;
  if (manifest_alpha) config.alpha = *manifest_alpha;
  if (!flags.config_path.empty()) apply_config_file(flags.config_path, config);
  if (flags.alpha_set) config.alpha = flags.alpha;
  if (flags.voxel_set) config.voxel_size = flags.voxel_size;
  if (flags.segment || flags.seg_min_set || flags.seg_max_set) {
    SegmentationParams params =
        config.segmentation.value_or(SegmentationParams{});
    if (flags.seg_min_set) params.min_brightness = flags.seg_min_brightness;
    if (flags.seg_max_set) params.max_chroma_spread = flags.seg_max_chroma;
    config.segmentation = params;
  }
  if (flags.icp_iters_set) config.icp.max_iterations = flags.icp_max_iterations;
  if (flags.icp_tol_set) config.icp.convergence_tol = flags.icp_tol;
  if (flags.icp_dist_set) {
    config.icp.max_correspondence_dist = flags.icp_max_dist;
    config.icp_dist_explicit = true;
  }
  if (flags.auto_pca) config.auto_pca_fallback = true;
  if (flags.pca_fallback_set) config.pca_fallback_rmse = flags.pca_fallback_rmse;
  if (flags.parallel_set) config.parallelism = flags.parallel;
  return config;
}

GraspOutcome parse_outcome_flags(const std::string& outcome,
                                 std::optional<double> t_dropped,
                                 std::optional<double> t_cycle) {
  if (outcome == "unsuccessful") return GraspOutcome::unsuccessful();
  if (outcome == "successful") return GraspOutcome::successful();
  if (outcome == "partial") {
    if (!t_dropped || !t_cycle) {
      throw std::runtime_error(
          "partial outcome requires --t-dropped and --t-cycle");
    }
    return GraspOutcome::partial(*t_dropped, *t_cycle);
  }
  throw std::runtime_error("unknown outcome '" + outcome +
                           "' (expected successful, partial or unsuccessful)");
}

int run_score(const ConfigFlags& flags, const std::string& pre_path,
              const std::string& grasp_path, const std::string& outcome_name,
              std::optional<double> t_dropped, std::optional<double> t_cycle,
              const std::string& mode_name, const std::string& init_path) {
  const GraspOutcome outcome =
      parse_outcome_flags(outcome_name, t_dropped, t_cycle);
  if (outcome.kind() == GraspOutcome::Kind::kUnsuccessful) {
    std::cout << "{\"score\":0}\n";
    return 0;
  }
  if (grasp_path.empty()) {
    throw std::runtime_error("--grasp is required unless the outcome is "
                             "unsuccessful");
  }
  const PipelineConfig config = resolve_config(flags, std::nullopt);

  TrialRecord record;
  record.trial_id = "cli";
  record.pre_cloud_path = pre_path;
  record.grasp_cloud_path = grasp_path;
  record.outcome = outcome;
  record.alignment_mode =
      mode_name == "pca" ? AlignmentMode::kPca : AlignmentMode::kIcp;
  if (!init_path.empty()) record.init_transform = load_transform(init_path);

  const ScoreRecord result = evaluate_trial(record, config);
  std::string line = "{\"dcd\":" + format_g9(*result.dcd_value);
  line += ",\"score\":" + format_g9(result.score.value);
  if (result.alignment_rmse) {
    line += ",\"alignment_rmse\":" + format_g9(*result.alignment_rmse);
  }
  line += ",\"alpha\":" + format_g9(result.alpha);
  line += ",\"mode\":\"";
  line += alignment_mode_name(*result.alignment_mode);
  line += "\"}";
  std::cout << line << "\n";
  return 0;
}

int run_align(const ConfigFlags& flags, const std::string& source_path,
              const std::string& target_path, const std::string& init_path,
              const std::string& out_cloud, const std::string& out_transform) {
  const PipelineConfig config = resolve_config(flags, std::nullopt);
  ICPParams params = config.icp;
  params.max_correspondence_dist = config.effective_correspondence_dist();

  const PointCloud source = load_cloud(source_path);
  const PointCloud target = load_cloud(target_path);
  RigidTransform init;
  if (!init_path.empty()) init = load_transform(init_path);

  const ICPResult result = icp_align(source, target, init, params);
  save_cloud(apply_transform(source, result.transform), out_cloud,
             PlyFormat::kBinaryLittleEndian);
  save_transform(result.transform, out_transform);

  std::string line = "{\"rmse\":" + format_g9(result.rmse);
  line += ",\"iterations\":" + std::to_string(result.iterations);
  line += ",\"converged\":";
  line += result.converged ? "true" : "false";
  line += "}";
  std::cout << line << "\n";
  return 0;
}

int run_batch_cmd(const ConfigFlags& flags, const std::string& manifest_path,
                  const std::string& out_dir) {
  const Manifest manifest = load_manifest(manifest_path);
  const PipelineConfig config = resolve_config(flags, manifest.alpha);

  const BatchResult batch = run_batch(manifest, config);
  const std::vector<AggregateCell> cells = aggregate(batch.records, manifest);
  export_results(batch.records, cells, manifest, config, out_dir);

  for (const TrialError& error : batch.errors) {
    std::cerr << "error: trial '" << error.trial_id << "': " << error.message
              << "\n";
  }
  std::string line = "{\"trials\":" + std::to_string(manifest.trials.size());
  line += ",\"scored\":" + std::to_string(batch.records.size());
  line += ",\"errors\":" + std::to_string(batch.errors.size());
  line += ",\"cells\":" + std::to_string(cells.size());
  line += ",\"out_dir\":\"" + out_dir + "\"}";
  std::cout << line << "\n";
  return batch.errors.empty() ? 0 : 2;
}

ShapeKind parse_shape_kind(const std::string& name) {
  if (name == "box") return ShapeKind::kBox;
  if (name == "cylinder") return ShapeKind::kCylinder;
  if (name == "sphere") return ShapeKind::kSphere;
  if (name == "extruded-spline") return ShapeKind::kExtrudedSpline;
  throw std::runtime_error("unknown shape '" + name +
                           "' (expected box, cylinder, sphere or "
                           "extruded-spline)");
}

json vec_json(const Eigen::Vector3d& v) {
  return json::array({v.x(), v.y(), v.z()});
}

int run_synth(const std::string& shape_name, std::vector<double> dims,
              int n_points, std::uint64_t seed, double squash,
              std::vector<double> squash_axis, double rotate_deg,
              std::vector<double> rotate_axis, std::vector<double> translate,
              std::vector<double> occlude_normal,
              std::optional<double> occlude_offset, double noise_sigma,
              std::uint64_t noise_seed, const std::string& out_dir) {
  ShapeSpec shape;
  shape.kind = parse_shape_kind(shape_name);
  dims.resize(3, 0.0);
  shape.dimensions = Eigen::Vector3d(dims[0], dims[1], dims[2]);
  shape.n_points = n_points;
  shape.seed = seed;

  DeformSpec deform_spec;
  deform_spec.squash_ratio = squash;
  deform_spec.squash_axis =
      Eigen::Vector3d(squash_axis[0], squash_axis[1], squash_axis[2]);
  Eigen::Vector3d rot_axis(rotate_axis[0], rotate_axis[1], rotate_axis[2]);
  if (rotate_deg != 0.0) {
    deform_spec.rigid_motion.rotation =
        Eigen::AngleAxisd(rotate_deg * std::numbers::pi / 180.0,
                          rot_axis.normalized())
            .toRotationMatrix();
  }
  deform_spec.rigid_motion.translation =
      Eigen::Vector3d(translate[0], translate[1], translate[2]);
  if (occlude_offset) {
    deform_spec.occlusion = HalfSpace{
        Eigen::Vector3d(occlude_normal[0], occlude_normal[1],
                        occlude_normal[2]),
        *occlude_offset};
  }
  deform_spec.noise_sigma = noise_sigma;
  deform_spec.noise_seed = noise_seed;

  const PointCloud pre = sample_shape(shape);
  const DeformResult grasp = deform(pre, deform_spec);

  std::filesystem::create_directories(out_dir);
  const auto dir = std::filesystem::path(out_dir);
  save_cloud(pre, (dir / "pre.ply").string(), PlyFormat::kBinaryLittleEndian);
  save_cloud(grasp.cloud, (dir / "grasp.ply").string(),
             PlyFormat::kBinaryLittleEndian);

  json sidecar;
  sidecar["transform"] =
      json::parse(transform_to_json(grasp.ground_truth));
  sidecar["shape"] = {{"kind", shape_name},
                      {"dimensions", vec_json(shape.dimensions)},
                      {"n_points", n_points},
                      {"seed", seed}};
  sidecar["deform"] = {{"squash_axis", vec_json(deform_spec.squash_axis)},
                       {"squash_ratio", squash},
                       {"noise_sigma", noise_sigma},
                       {"noise_seed", noise_seed}};
  if (deform_spec.occlusion) {
    sidecar["deform"]["occlusion"] = {
        {"normal", vec_json(deform_spec.occlusion->normal)},
        {"offset", deform_spec.occlusion->offset}};
  }
  sidecar["rng"] = std::string(Rng::kIdentity);
  std::ofstream out(dir / "ground_truth.json");
  out << sidecar.dump(2) << "\n";
  if (!out) throw std::runtime_error(out_dir + ": write failed");

  std::cout << "{\"pre\":\"" << (dir / "pre.ply").string() << "\",\"grasp\":\""
            << (dir / "grasp.ply").string() << "\",\"points\":"
            << grasp.cloud.size() << "}\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "sograb: soft-grasp benchmarking from pre/during-grasp point clouds"};
  app.require_subcommand(1);

  // score
  auto* score_cmd = app.add_subcommand(
      "score", "score one grasp from a pre/grasp cloud pair");
  ConfigFlags score_flags;
  std::string pre_path, grasp_path, outcome_name = "successful";
  std::string mode_name = "icp", init_path;
  std::optional<double> t_dropped, t_cycle;
  score_cmd->add_option("--pre", pre_path, "pre-grasp PLY")->required();
  score_cmd->add_option("--grasp", grasp_path, "during-grasp PLY");
  score_cmd->add_option("--outcome", outcome_name,
                        "successful | partial | unsuccessful")
      ->required();
  score_cmd->add_option("--t-dropped", t_dropped,
                        "seconds held before the drop (partial only)");
  score_cmd->add_option("--t-cycle", t_cycle,
                        "full pick-and-place cycle duration in seconds");
  score_cmd->add_option("--mode", mode_name, "alignment mode: icp | pca")
      ->check(CLI::IsMember({"icp", "pca"}));
  score_cmd->add_option("--init", init_path,
                        "initial alignment JSON (kinematic prior)");
  add_config_flags(score_cmd, score_flags);

  // align
  auto* align_cmd =
      app.add_subcommand("align", "rigidly align one cloud onto another");
  ConfigFlags align_flags;
  std::string source_path, target_path, align_init;
  std::string out_cloud = "aligned.ply", out_transform = "transform.json";
  align_cmd->add_option("--source", source_path, "cloud to move")->required();
  align_cmd->add_option("--target", target_path, "reference cloud")->required();
  align_cmd->add_option("--init", align_init, "initial alignment JSON");
  align_cmd->add_option("--out-cloud", out_cloud,
                        "where to write the aligned cloud (PLY)");
  align_cmd->add_option("--out-transform", out_transform,
                        "where to write the final transform (JSON)");
  add_config_flags(align_cmd, align_flags);

  // batch
  auto* batch_cmd = app.add_subcommand(
      "batch", "evaluate a trial manifest and write CSV/SVG reports");
  ConfigFlags batch_flags;
  std::string manifest_path, out_dir = "results";
  batch_cmd->add_option("--manifest", manifest_path, "trial manifest JSON")
      ->required();
  batch_cmd->add_option("--out-dir", out_dir, "output directory");
  add_config_flags(batch_cmd, batch_flags);

  // synth
  auto* synth_cmd = app.add_subcommand(
      "synth", "generate a synthetic pre/grasp pair with known ground truth");
  std::string shape_name = "box";
  std::vector<double> dims{0.055, 0.055, 0.055};
  int n_points = 2000;
  std::uint64_t seed = 0, noise_seed = 0;
  double squash = 1.0, rotate_deg = 0.0, noise_sigma = 0.0;
  std::vector<double> squash_axis{0, 0, 1}, rotate_axis{0, 0, 1},
      translate{0, 0, 0}, occlude_normal{0, 0, 1};
  std::optional<double> occlude_offset;
  std::string synth_out = "synth";
  synth_cmd->add_option("--shape", shape_name,
                        "box | cylinder | sphere | extruded-spline");
  synth_cmd->add_option("--dims", dims,
                        "shape dimensions in meters, comma separated")
      ->delimiter(',');
  synth_cmd->add_option("--n-points", n_points, "points per cloud");
  synth_cmd->add_option("--seed", seed, "sampling seed");
  synth_cmd->add_option("--squash", squash, "squash ratio in (0, 1]");
  synth_cmd->add_option("--squash-axis", squash_axis, "squash axis")
      ->delimiter(',');
  synth_cmd->add_option("--rotate-deg", rotate_deg,
                        "rigid-motion rotation angle in degrees");
  synth_cmd->add_option("--rotate-axis", rotate_axis, "rotation axis")
      ->delimiter(',');
  synth_cmd->add_option("--translate", translate,
                        "rigid-motion translation in meters")
      ->delimiter(',');
  synth_cmd->add_option("--occlude-normal", occlude_normal,
                        "occlusion half-space normal")
      ->delimiter(',');
  synth_cmd->add_option("--occlude-offset", occlude_offset,
                        "occlusion plane offset; points with normal.p > "
                        "offset are dropped");
  synth_cmd->add_option("--noise-sigma", noise_sigma,
                        "isotropic Gaussian noise sigma in meters");
  synth_cmd->add_option("--noise-seed", noise_seed, "noise seed");
  synth_cmd->add_option("--out-dir", synth_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*score_cmd) {
      mark_presence(score_cmd, score_flags);
      return run_score(score_flags, pre_path, grasp_path, outcome_name,
                       t_dropped, t_cycle, mode_name, init_path);
    }
    if (*align_cmd) {
      mark_presence(align_cmd, align_flags);
      return run_align(align_flags, source_path, target_path, align_init,
                       out_cloud, out_transform);
    }
    if (*batch_cmd) {
      mark_presence(batch_cmd, batch_flags);
      return run_batch_cmd(batch_flags, manifest_path, out_dir);
    }
    if (*synth_cmd) {
      return run_synth(shape_name, dims, n_points, seed, squash, squash_axis,
                       rotate_deg, rotate_axis, translate, occlude_normal,
                       occlude_offset, noise_sigma, noise_seed, synth_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
