#include "sograb/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json_util.hpp"
#include "sograb/parallel.hpp"
#include "sograb/ply_io.hpp"

namespace sograb {

namespace fs = std::filesystem;
using nlohmann::json;

const char* alignment_mode_name(AlignmentMode mode) {
  return mode == AlignmentMode::kIcp ? "icp" : "pca";
}

double PipelineConfig::effective_correspondence_dist() const {
  if (icp_dist_explicit) return icp.max_correspondence_dist;
  if (voxel_size) return 10.0 * *voxel_size;
  return 0.01;
}

namespace {

std::string trial_label(const json& trial, std::size_t index) {
  if (trial.is_object() && trial.contains("trial_id") &&
      trial.at("trial_id").is_string()) {
    return "trial '" + trial.at("trial_id").get<std::string>() + "'";
  }
  return "trial #" + std::to_string(index);
}

GraspOutcome parse_outcome(const json& j, const std::string& label) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    throw std::runtime_error(label +
                             ": outcome must be an object with a \"type\"");
  }
  const std::string type = j.at("type").get<std::string>();
  if (type == "unsuccessful") return GraspOutcome::unsuccessful();
  if (type == "successful") return GraspOutcome::successful();
  if (type == "partial") {
    if (!j.contains("t_dropped")) {
      throw std::runtime_error(label +
                               ": partial outcome missing field t_dropped");
    }
    if (!j.contains("t_cycle")) {
      throw std::runtime_error(label +
                               ": partial outcome missing field t_cycle");
    }
    try {
      return GraspOutcome::partial(j.at("t_dropped").get<double>(),
                                   j.at("t_cycle").get<double>());
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(label + ": " + e.what());
    }
  }
  throw std::runtime_error(label + ": unknown outcome type '" + type + "'");
}

std::string require_string(const json& trial, const char* field,
                           const std::string& label) {
  if (!trial.contains(field) || !trial.at(field).is_string()) {
    throw std::runtime_error(label + ": missing or non-string field " + field);
  }
  return trial.at(field).get<std::string>();
}

}  // namespace

Manifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path + ": cannot open manifest");
  json root;
  try {
    root = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  if (!root.is_object() || !root.contains("trials") ||
      !root.at("trials").is_array()) {
    throw std::runtime_error(path + ": manifest needs a \"trials\" array");
  }

  Manifest manifest;
  if (root.contains("alpha")) {
    manifest.alpha = root.at("alpha").get<double>();
  }

  const fs::path base = fs::absolute(fs::path(path)).parent_path();
  const auto resolve = [&base](const std::string& p) {
    fs::path candidate(p);
    return candidate.is_absolute() ? candidate.string()
                                   : (base / candidate).string();
  };

  std::unordered_set<std::string> seen_ids;
  for (std::size_t i = 0; i < root.at("trials").size(); ++i) {
    const json& trial = root.at("trials").at(i);
    const std::string label = trial_label(trial, i);

    TrialRecord record;
    record.trial_id = require_string(trial, "trial_id", label);
    if (!seen_ids.insert(record.trial_id).second) {
      throw std::runtime_error(path + ": duplicate trial_id '" +
                               record.trial_id + "'");
    }
    record.object_id = require_string(trial, "object_id", label);
    record.material = require_string(trial, "material", label);
    record.gripper_id = require_string(trial, "gripper_id", label);
    if (trial.contains("repeat")) {
      record.repeat = trial.at("repeat").get<int>();
    }
    record.pre_cloud_path = resolve(require_string(trial, "pre_cloud", label));

    if (!trial.contains("outcome")) {
      throw std::runtime_error(label + ": missing field outcome");
    }
    record.outcome = parse_outcome(trial.at("outcome"), label);

    const bool unsuccessful =
        record.outcome.kind() == GraspOutcome::Kind::kUnsuccessful;
    const bool has_grasp_cloud =
        trial.contains("grasp_cloud") && !trial.at("grasp_cloud").is_null();
    if (!unsuccessful && !has_grasp_cloud) {
      throw std::runtime_error(label +
                               ": missing grasp_cloud for a non-unsuccessful "
                               "outcome");
    }
    if (unsuccessful && has_grasp_cloud) {
      throw std::runtime_error(label +
                               ": grasp_cloud given for an unsuccessful "
                               "outcome (no grasped cloud can exist)");
    }
    if (has_grasp_cloud) {
      record.grasp_cloud_path =
          resolve(trial.at("grasp_cloud").get<std::string>());
    }

    if (trial.contains("init_transform")) {
      try {
        record.init_transform =
            detail::transform_from_json(trial.at("init_transform"));
      } catch (const std::exception& e) {
        throw std::runtime_error(label + ": " + e.what());
      }
    }

    if (trial.contains("alignment_mode")) {
      const std::string mode = trial.at("alignment_mode").get<std::string>();
      if (mode == "icp") record.alignment_mode = AlignmentMode::kIcp;
      else if (mode == "pca") record.alignment_mode = AlignmentMode::kPca;
      else
        throw std::runtime_error(label + ": unknown alignment_mode '" + mode +
                                 "' (expected icp or pca)");
    }

    manifest.trials.push_back(std::move(record));
  }
  return manifest;
}

ScoreRecord evaluate_trial(const TrialRecord& record,
                           const PipelineConfig& config) {
  ScoreRecord result;
  result.trial_id = record.trial_id;
  result.alpha = config.alpha;

  if (record.outcome.kind() == GraspOutcome::Kind::kUnsuccessful) {
    result.score = grasp_score(record.outcome, std::nullopt);
    return result;
  }

  PointCloud pre = load_cloud(record.pre_cloud_path);
  PointCloud grasp = load_cloud(record.grasp_cloud_path);
  if (config.segmentation) {
    pre = segment_by_color(pre, *config.segmentation);
    grasp = segment_by_color(grasp, *config.segmentation);
  }
  if (config.voxel_size) {
    pre = voxel_downsample(pre, *config.voxel_size);
    grasp = voxel_downsample(grasp, *config.voxel_size);
  }

  ICPParams icp_params = config.icp;
  icp_params.max_correspondence_dist = config.effective_correspondence_dist();

  AlignmentMode mode = record.alignment_mode;
  RigidTransform alignment;
  std::optional<double> rmse;
  if (mode == AlignmentMode::kIcp) {
    const ICPResult icp =
        icp_align(pre, grasp, record.init_transform, icp_params);
    if (config.auto_pca_fallback && icp.rmse > config.pca_fallback_rmse) {
      mode = AlignmentMode::kPca;
    } else {
      alignment = icp.transform;
      rmse = icp.rmse;
    }
  }
  if (mode == AlignmentMode::kPca) {
    alignment = pca_align(pre, grasp);
    rmse = nn_rmse(apply_transform(pre, alignment), NNIndex(grasp));
  }

  const PointCloud aligned = apply_transform(pre, alignment);
  const double d = dcd(aligned, grasp, DCDParams{config.alpha});

  result.dcd_value = d;
  result.score = grasp_score(record.outcome, d);
  result.alignment_rmse = rmse;
  result.alignment_mode = mode;
  return result;
}

BatchResult run_batch(const Manifest& manifest, const PipelineConfig& config) {
  const std::size_t n = manifest.trials.size();
  std::vector<std::optional<ScoreRecord>> slots(n);
  std::vector<std::optional<TrialError>> error_slots(n);

  parallel_for(n, config.parallelism, [&](std::size_t i) {
    try {
      slots[i] = evaluate_trial(manifest.trials[i], config);
    } catch (const std::exception& e) {
      error_slots[i] = TrialError{manifest.trials[i].trial_id, e.what()};
    } catch (...) {
      error_slots[i] =
          TrialError{manifest.trials[i].trial_id, "unknown error"};
    }
  });

  BatchResult result;
  result.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i]) result.records.push_back(std::move(*slots[i]));
    if (error_slots[i]) result.errors.push_back(std::move(*error_slots[i]));
  }
  return result;
}

std::vector<AggregateCell> aggregate(const std::vector<ScoreRecord>& records,
                                     const Manifest& manifest) {
  std::unordered_map<std::string, const TrialRecord*> by_id;
  by_id.reserve(manifest.trials.size());
  for (const TrialRecord& trial : manifest.trials) {
    by_id[trial.trial_id] = &trial;
  }

  using CellKey = std::tuple<std::string, std::string, std::string>;
  std::map<CellKey, std::vector<double>> groups;
  for (const ScoreRecord& record : records) {
    const auto it = by_id.find(record.trial_id);
    if (it == by_id.end()) {
      throw std::runtime_error("aggregate: trial_id '" + record.trial_id +
                               "' not present in manifest");
    }
    const TrialRecord& trial = *it->second;
    groups[CellKey{trial.object_id, trial.material, trial.gripper_id}]
        .push_back(record.score.value);
  }

  std::vector<AggregateCell> cells;
  cells.reserve(groups.size());
  for (const auto& [key, scores] : groups) {
    AggregateCell cell;
    cell.object_id = std::get<0>(key);
    cell.material = std::get<1>(key);
    cell.gripper_id = std::get<2>(key);
    cell.n = static_cast<int>(scores.size());
    double sum = 0.0;
    for (double s : scores) sum += s;
    cell.mean = sum / static_cast<double>(scores.size());
    double sq = 0.0;
    for (double s : scores) sq += (s - cell.mean) * (s - cell.mean);
    cell.std_dev = std::sqrt(sq / static_cast<double>(scores.size()));
    cells.push_back(std::move(cell));
  }
  return cells;  // std::map iteration is already sorted by the cell key
}

}  // namespace sograb
