// Copyright 2026 The SliceRank Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SLICERANK_REPORT_H_
#define SLICERANK_REPORT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slicerank/slice_engine.h"

namespace slicerank {

struct ReportOptions {
  SmoothingPolicy smoothing;
  MissingSlicePolicy missing = MissingSlicePolicy::kDropAndRenormalize;
  // Heatmap rows keep models with at least this many judgments.
  int64_t min_evals = 4000;
  Level divergence_level = Level::kMid;
  int64_t min_models_n = 0;
  Level outlier_level = Level::kMid;
  double outlier_threshold = 3.0;
  // When set, heatmap columns follow the spec and ranking.json is written.
  std::optional<SliceSpec> spec;
  std::set<std::string> greeting_lexicon;  // empty: the default lexicon
  // Written as annotation_<name>.json with the snapshot digests added.
  std::map<std::string, nlohmann::json> annotation_reports;
};

struct ReportFile {
  std::string name;
  std::string content;
};

// CSV artifacts start with two "# key: value" digest lines, then a fixed
// header row. JSON artifacts carry a "snapshot" object.
std::string CsvDigestPreamble(const SliceEngine& engine);
// RFC 4180 quoting when the field holds a comma, quote or newline.
std::string CsvField(const std::string& value);
// Shortest round-trip decimal, empty for nullopt.
std::string CsvNumber(std::optional<double> value);

// Divergence rows as CSV: node,label,spearman,models_used,note
std::string DivergenceCsv(const SliceEngine& engine, const DivergenceReport& report);
nlohmann::json DivergenceJson(const SliceEngine& engine, const DivergenceReport& report);

// Outlier cells as CSV: model,node,label,z,node_wins,node_losses,rest_wins,rest_losses
std::string OutliersCsv(const SliceEngine& engine, const OutlierReport& report);
nlohmann::json OutliersJson(const SliceEngine& engine, const OutlierReport& report, double threshold);

// Node sizes are prompt counts.
nlohmann::json TreemapJson(const SliceEngine& engine);

struct Heatmap {
  std::vector<std::string> columns;
  std::vector<std::string> models;  // row order
  std::vector<std::vector<ModelSliceStats>> cells;  // [model][column]
  std::vector<std::optional<double>> scores;  // aggregate, when a spec is set
  std::vector<std::string> dropped_models;    // below min_evals
};

Heatmap BuildHeatmap(const SliceEngine& engine, const ReportOptions& options);
// Long format: model,node,label,smoothed_rate,raw_rate,n_effective,wins,losses,ties
std::string HeatmapCsv(const SliceEngine& engine, const Heatmap& heatmap);
nlohmann::json HeatmapJson(const SliceEngine& engine, const Heatmap& heatmap, int64_t min_evals);

// Every artifact of a report run, in a fixed order, ending with manifest.json.
std::vector<ReportFile> BuildReportBundle(const SliceEngine& engine, const ReportOptions& options);
void WriteReportFiles(const std::vector<ReportFile>& files, const std::filesystem::path& dir);

}  // namespace slicerank

#endif  // SLICERANK_REPORT_H_
