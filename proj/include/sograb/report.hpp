#pragma once

#include <string>
#include <vector>

#include "sograb/pipeline.hpp"

namespace sograb {

// Writes scores.csv, aggregate.csv and heatmap.svg into out_dir. The CSV
// headers echo the numeric configuration (never the parallelism degree, so
// reruns at any thread count are byte-identical).
void export_results(const std::vector<ScoreRecord>& records,
                    const std::vector<AggregateCell>& cells,
                    const Manifest& manifest, const PipelineConfig& config,
                    const std::string& out_dir);

}  // namespace sograb
