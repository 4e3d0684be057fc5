#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sograb/alignment.hpp"
#include "sograb/metric.hpp"
#include "sograb/point_cloud.hpp"
#include "sograb/transform.hpp"

namespace sograb {

enum class AlignmentMode { kIcp, kPca };

const char* alignment_mode_name(AlignmentMode mode);

// One grasp attempt as recorded in a manifest. Cloud paths are resolved
// against the manifest location at load time.
struct TrialRecord {
  std::string trial_id;
  std::string object_id;   // e.g. "B1", "O3"
  std::string material;    // shore hardness label, e.g. "40A"
  std::string gripper_id;  // e.g. "fin-ray-4", "rigid"
  int repeat = 0;
  std::string pre_cloud_path;
  std::string grasp_cloud_path;  // empty iff outcome is Unsuccessful
  RigidTransform init_transform; // kinematic prior, identity if not given
  AlignmentMode alignment_mode = AlignmentMode::kIcp;
  GraspOutcome outcome = GraspOutcome::unsuccessful();
};

struct Manifest {
  std::optional<double> alpha;  // top-level "alpha" key, if present
  std::vector<TrialRecord> trials;
};

// Batch configuration. Flags > config file > manifest alpha > these defaults.
struct PipelineConfig {
  double alpha = 100.0;
  std::optional<double> voxel_size;                 // downsampling, opt-in
  std::optional<SegmentationParams> segmentation;   // color segmentation, opt-in
  ICPParams icp;
  // When the correspondence threshold was not set explicitly it defaults to
  // 10x the voxel size, or 10 mm with no downsampling.
  bool icp_dist_explicit = false;
  bool auto_pca_fallback = false;   // retry with PCA when ICP RMSE is large
  double pca_fallback_rmse = 0.005; // meters
  int parallelism = 0;              // 0 = hardware concurrency

  double effective_correspondence_dist() const;
};

struct ScoreRecord {
  std::string trial_id;
  std::optional<double> dcd_value;  // absent iff outcome was Unsuccessful
  Score score;
  std::optional<double> alignment_rmse;
  std::optional<AlignmentMode> alignment_mode;  // mode actually used
  double alpha = 100.0;
};

struct TrialError {
  std::string trial_id;
  std::string message;
};

struct BatchResult {
  std::vector<ScoreRecord> records;  // manifest order, evaluated trials only
  std::vector<TrialError> errors;    // manifest order
};

// (object, material, gripper) summary: mean and population standard
// deviation of the member scores.
struct AggregateCell {
  std::string object_id;
  std::string material;
  std::string gripper_id;
  int n = 0;
  double mean = 0.0;
  double std_dev = 0.0;
};

// Parses and validates a manifest JSON file. Throws std::runtime_error
// naming the offending trial/field on schema violations.
Manifest load_manifest(const std::string& path);

// Runs one trial: load clouds, optional segmentation and downsampling, align
// pre-grasp onto grasp cloud, DCD, score. Unsuccessful trials score 0
// without touching any files.
ScoreRecord evaluate_trial(const TrialRecord& record,
                           const PipelineConfig& config);

// Evaluates every trial (possibly in parallel); output order follows the
// manifest regardless of execution order. A failing trial becomes an entry
// in errors rather than aborting the batch.
BatchResult run_batch(const Manifest& manifest, const PipelineConfig& config);

// One cell per observed (object, material, gripper), sorted by that key.
std::vector<AggregateCell> aggregate(const std::vector<ScoreRecord>& records,
                                     const Manifest& manifest);

}  // namespace sograb
