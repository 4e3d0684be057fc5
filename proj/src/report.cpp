#include "sograb/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "sograb/numfmt.hpp"

namespace sograb {

namespace fs = std::filesystem;

namespace {

const char* outcome_name(const GraspOutcome& outcome) {
  switch (outcome.kind()) {
    case GraspOutcome::Kind::kUnsuccessful: return "unsuccessful";
    case GraspOutcome::Kind::kPartial: return "partial";
    case GraspOutcome::Kind::kSuccessful: return "successful";
  }
  return "?";
}

std::string config_comment(const PipelineConfig& config) {
  // Parallelism is deliberately not echoed: reruns at any thread count must
  // produce byte-identical files.
  std::string line = "# config: alpha=" + format_g9(config.alpha);
  line += ", voxel_size=";
  line += config.voxel_size ? format_g9(*config.voxel_size) : "none";
  line += ", segmentation=";
  if (config.segmentation) {
    line += "min_brightness=" + std::to_string(config.segmentation->min_brightness) +
            "/max_chroma_spread=" +
            std::to_string(config.segmentation->max_chroma_spread);
  } else {
    line += "none";
  }
  line += ", icp.max_iterations=" + std::to_string(config.icp.max_iterations);
  line += ", icp.convergence_tol=" + format_g9(config.icp.convergence_tol);
  line += ", icp.max_correspondence_dist=" +
          format_g9(config.effective_correspondence_dist());
  line += ", auto_pca_fallback=";
  line += config.auto_pca_fallback
              ? "rmse>" + format_g9(config.pca_fallback_rmse)
              : "off";
  return line;
}

struct Rgb {
  double r, g, b;
};

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t,
          a.b + (b.b - a.b) * t};
}

// Linear red-yellow-green ramp over scores in [0.5, 1].
std::string score_color(double score) {
  const Rgb red{215, 48, 39};
  const Rgb yellow{254, 224, 139};
  const Rgb green{26, 152, 80};
  const double t = std::clamp((score - 0.5) / 0.5, 0.0, 1.0);
  const Rgb c = t < 0.5 ? lerp(red, yellow, t * 2.0)
                        : lerp(yellow, green, (t - 0.5) * 2.0);
  char buf[16];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x",
                static_cast<int>(std::lround(c.r)),
                static_cast<int>(std::lround(c.g)),
                static_cast<int>(std::lround(c.b)));
  return buf;
}

std::string xml_escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

void write_scores_csv(const std::vector<ScoreRecord>& records,
                      const Manifest& manifest, const PipelineConfig& config,
                      const fs::path& path) {
  std::unordered_map<std::string, const TrialRecord*> by_id;
  for (const TrialRecord& trial : manifest.trials) by_id[trial.trial_id] = &trial;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << config_comment(config) << "\n";
  out << "trial_id,object_id,material,gripper_id,repeat,outcome,dcd,score,"
         "alignment_mode,alignment_rmse,alpha,t_dropped,t_cycle\n";
  for (const ScoreRecord& record : records) {
    const auto it = by_id.find(record.trial_id);
    if (it == by_id.end()) {
      throw std::runtime_error("export_results: trial_id '" + record.trial_id +
                               "' not present in manifest");
    }
    const TrialRecord& trial = *it->second;
    out << record.trial_id << ',' << trial.object_id << ',' << trial.material
        << ',' << trial.gripper_id << ',' << trial.repeat << ','
        << outcome_name(trial.outcome) << ',';
    if (record.dcd_value) out << format_roundtrip(*record.dcd_value);
    out << ',' << format_roundtrip(record.score.value) << ',';
    if (record.alignment_mode) out << alignment_mode_name(*record.alignment_mode);
    out << ',';
    if (record.alignment_rmse) out << format_roundtrip(*record.alignment_rmse);
    out << ',' << format_roundtrip(record.alpha) << ',';
    if (trial.outcome.kind() == GraspOutcome::Kind::kPartial) {
      out << format_roundtrip(trial.outcome.t_dropped()) << ','
          << format_roundtrip(trial.outcome.t_cycle());
    } else {
      out << ',';
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void write_aggregate_csv(const std::vector<AggregateCell>& cells,
                         const PipelineConfig& config, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << config_comment(config) << "\n";
  out << "# std is the population standard deviation (divide by N)\n";
  out << "object_id,material,gripper_id,n,mean,std\n";
  for (const AggregateCell& cell : cells) {
    out << cell.object_id << ',' << cell.material << ',' << cell.gripper_id
        << ',' << cell.n << ',' << format_roundtrip(cell.mean) << ','
        << format_roundtrip(cell.std_dev) << '\n';
  }
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void write_heatmap_svg(const std::vector<AggregateCell>& cells,
                       const PipelineConfig& config, const fs::path& path) {
  std::set<std::string> object_set;
  std::set<std::pair<std::string, std::string>> column_set;
  std::unordered_map<std::string, const AggregateCell*> by_key;
  for (const AggregateCell& cell : cells) {
    object_set.insert(cell.object_id);
    column_set.insert({cell.material, cell.gripper_id});
    by_key[cell.object_id + '\x1f' + cell.material + '\x1f' + cell.gripper_id] =
        &cell;
  }
  const std::vector<std::string> objects(object_set.begin(), object_set.end());
  const std::vector<std::pair<std::string, std::string>> columns(
      column_set.begin(), column_set.end());

  constexpr int kCellW = 110;
  constexpr int kCellH = 40;
  constexpr int kLeft = 80;
  constexpr int kTop = 70;
  const int width = kLeft + kCellW * static_cast<int>(columns.size()) + 10;
  const int height = kTop + kCellH * static_cast<int>(objects.size()) + 30;

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" font-family=\"sans-serif\">\n";
  out << "  <text x=\"" << kLeft << "\" y=\"18\" font-size=\"14\">"
      << "grasp scores: mean \xC2\xB1 std per (object, material, gripper), "
         "color scale 0.5..1 (alpha="
      << xml_escape(format_g9(config.alpha)) << ")</text>\n";

  for (std::size_t c = 0; c < columns.size(); ++c) {
    const int x = kLeft + static_cast<int>(c) * kCellW + kCellW / 2;
    out << "  <text x=\"" << x << "\" y=\"" << kTop - 26
        << "\" font-size=\"11\" text-anchor=\"middle\">"
        << xml_escape(columns[c].first) << "</text>\n";
    out << "  <text x=\"" << x << "\" y=\"" << kTop - 12
        << "\" font-size=\"11\" text-anchor=\"middle\">"
        << xml_escape(columns[c].second) << "</text>\n";
  }

  char text[64];
  for (std::size_t r = 0; r < objects.size(); ++r) {
    const int y = kTop + static_cast<int>(r) * kCellH;
    out << "  <text x=\"" << kLeft - 8 << "\" y=\"" << y + kCellH / 2 + 4
        << "\" font-size=\"12\" text-anchor=\"end\">" << xml_escape(objects[r])
        << "</text>\n";
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const int x = kLeft + static_cast<int>(c) * kCellW;
      const auto it = by_key.find(objects[r] + '\x1f' + columns[c].first +
                                  '\x1f' + columns[c].second);
      if (it == by_key.end()) {
        out << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCellW
            << "\" height=\"" << kCellH
            << "\" fill=\"#dddddd\" stroke=\"white\"/>\n";
        continue;
      }
      const AggregateCell& cell = *it->second;
      out << "  <rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << kCellW
          << "\" height=\"" << kCellH << "\" fill=\"" << score_color(cell.mean)
          << "\" stroke=\"white\"/>\n";
      std::snprintf(text, sizeof(text), "%.3f \xC2\xB1 %.3f", cell.mean,
                    cell.std_dev);
      out << "  <text x=\"" << x + kCellW / 2 << "\" y=\"" << y + kCellH / 2 + 4
          << "\" font-size=\"11\" text-anchor=\"middle\">" << text
          << "</text>\n";
    }
  }
  out << "</svg>\n";
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace

void export_results(const std::vector<ScoreRecord>& records,
                    const std::vector<AggregateCell>& cells,
                    const Manifest& manifest, const PipelineConfig& config,
                    const std::string& out_dir) {
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec && !fs::is_directory(dir)) {
    throw std::runtime_error(out_dir + ": cannot create output directory");
  }
  write_scores_csv(records, manifest, config, dir / "scores.csv");
  write_aggregate_csv(cells, config, dir / "aggregate.csv");
  write_heatmap_svg(cells, config, dir / "heatmap.svg");
}

}  // namespace sograb
