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

#include "slicerank/report.h"

#include <algorithm>
#include <fstream>

#include "slicerank/diagnostics.h"
#include "slicerank/digest.h"
#include "slicerank/error.h"

namespace slicerank {

using json = nlohmann::json;

namespace {

json SnapshotJson(const SliceEngine& engine) {
  return {{"dataset_digest", engine.dataset().source_digest()},
          {"hierarchy_digest", engine.hierarchy().digest()}};
}

std::string NodeLabel(const SliceEngine& engine, const std::string& node) {
  if (node == kAllNode) return "All prompts";
  return engine.hierarchy().At(node).label;
}

json TreemapNode(const SliceEngine& engine, const std::string& id) {
  const auto& n = engine.hierarchy().At(id);
  json children = json::array();
  for (const auto& c : engine.hierarchy().Children(id)) {
    if (engine.PromptCount(c) > 0) children.push_back(TreemapNode(engine, c));
  }
  return {{"id", id},
          {"label", n.label},
          {"level", LevelName(n.level)},
          {"size", engine.PromptCount(id)},
          {"children", std::move(children)}};
}

std::string Pretty(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

std::string CsvDigestPreamble(const SliceEngine& engine) {
  return "# dataset_digest: " + engine.dataset().source_digest() + "\n# hierarchy_digest: " +
         engine.hierarchy().digest() + "\n";
}

std::string CsvField(const std::string& value) {
  if (value.find_first_of(",\"\n\r") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string CsvNumber(std::optional<double> value) { return value ? json(*value).dump() : std::string(); }

std::string DivergenceCsv(const SliceEngine& engine, const DivergenceReport& report) {
  std::string out = CsvDigestPreamble(engine) + "node,label,spearman,models_used,note\n";
  for (const auto& r : report.rows) {
    out += CsvField(r.node) + "," + CsvField(r.label) + "," + CsvNumber(r.spearman) + "," +
           std::to_string(r.models_used) + "," + CsvField(r.note) + "\n";
  }
  return out;
}

json DivergenceJson(const SliceEngine& engine, const DivergenceReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"node", r.node},
                    {"label", r.label},
                    {"spearman", r.spearman ? json(*r.spearman) : json(nullptr)},
                    {"models_used", r.models_used},
                    {"n_per_model", r.n_per_model},
                    {"note", r.note}});
  }
  return {{"schema_version", 1},
          {"snapshot", SnapshotJson(engine)},
          {"level", LevelName(report.level)},
          {"rows", rows}};
}

std::string OutliersCsv(const SliceEngine& engine, const OutlierReport& report) {
  std::string out =
      CsvDigestPreamble(engine) + "model,node,label,z,node_wins,node_losses,rest_wins,rest_losses\n";
  for (const auto& c : report.cells) {
    out += CsvField(c.model) + "," + CsvField(c.node) + "," + CsvField(NodeLabel(engine, c.node)) + "," +
           CsvNumber(c.z) + "," + std::to_string(c.in_node.wins) + "," + std::to_string(c.in_node.losses) + "," +
           std::to_string(c.rest.wins) + "," + std::to_string(c.rest.losses) + "\n";
  }
  return out;
}

json OutliersJson(const SliceEngine& engine, const OutlierReport& report, double threshold) {
  json cells = json::array();
  for (const auto& c : report.cells) {
    cells.push_back({{"model", c.model},
                     {"node", c.node},
                     {"label", NodeLabel(engine, c.node)},
                     {"z", c.z},
                     {"node_counts", {{"wins", c.in_node.wins}, {"losses", c.in_node.losses}, {"ties", c.in_node.ties}}},
                     {"rest_counts", {{"wins", c.rest.wins}, {"losses", c.rest.losses}, {"ties", c.rest.ties}}}});
  }
  return {{"schema_version", 1},
          {"snapshot", SnapshotJson(engine)},
          {"threshold", threshold},
          {"cells", cells},
          {"notes", report.notes}};
}

json TreemapJson(const SliceEngine& engine) {
  json roots = json::array();
  size_t assigned = 0;
  for (const auto& id : engine.hierarchy().NodesAtLevel(Level::kTop)) {
    assigned += engine.PromptCount(id);
    if (engine.PromptCount(id) > 0) roots.push_back(TreemapNode(engine, id));
  }
  const size_t total = engine.dataset().prompts().size();
  return {{"schema_version", 1},
          {"snapshot", SnapshotJson(engine)},
          {"size_unit", "prompts"},
          {"total_prompts", total},
          {"assigned_prompts", assigned},
          {"unassigned_prompts", total - assigned},
          {"roots", roots}};
}

Heatmap BuildHeatmap(const SliceEngine& engine, const ReportOptions& options) {
  if (options.min_evals < 0) throw ValidationError("min_evals must be >= 0");
  Heatmap h;
  std::vector<std::string> kept;
  for (const auto& m : engine.models()) {
    if (engine.OverallCounts(m).total() >= options.min_evals) {
      kept.push_back(m);
    } else {
      h.dropped_models.push_back(m);
    }
  }
  if (options.spec) {
    const auto table = engine.WeightedRanking(*options.spec, options.smoothing, options.missing);
    for (const auto& c : table.columns) h.columns.push_back(c);
    for (const auto& row : table.rows) {
      if (std::find(kept.begin(), kept.end(), row.model) == kept.end()) continue;
      h.models.push_back(row.model);
      h.cells.push_back(row.cells);
      h.scores.push_back(row.score);
    }
    return h;
  }
  h.columns = engine.hierarchy().NodesAtLevel(Level::kMid);
  // Rows by overall smoothed rate, then name.
  std::vector<std::pair<double, std::string>> order;
  for (const auto& m : kept) {
    order.emplace_back(engine.StatsFor(m, kAllNode, options.smoothing).smoothed_rate.value_or(-1.0), m);
  }
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [rate, m] : order) {
    h.models.push_back(m);
    std::vector<ModelSliceStats> row;
    for (const auto& c : h.columns) row.push_back(engine.StatsFor(m, c, options.smoothing));
    h.cells.push_back(std::move(row));
  }
  return h;
}

std::string HeatmapCsv(const SliceEngine& engine, const Heatmap& heatmap) {
  std::string out =
      CsvDigestPreamble(engine) + "model,node,label,smoothed_rate,raw_rate,n_effective,wins,losses,ties\n";
  for (size_t i = 0; i < heatmap.models.size(); ++i) {
    for (size_t c = 0; c < heatmap.columns.size(); ++c) {
      const auto& s = heatmap.cells[i][c];
      out += CsvField(heatmap.models[i]) + "," + CsvField(heatmap.columns[c]) + "," +
             CsvField(NodeLabel(engine, heatmap.columns[c])) + "," + CsvNumber(s.smoothed_rate) + "," +
             CsvNumber(s.raw_rate) + "," + std::to_string(s.n_effective()) + "," + std::to_string(s.counts.wins) +
             "," + std::to_string(s.counts.losses) + "," + std::to_string(s.counts.ties) + "\n";
    }
  }
  return out;
}

json HeatmapJson(const SliceEngine& engine, const Heatmap& heatmap, int64_t min_evals) {
  json columns = json::array();
  for (const auto& c : heatmap.columns) columns.push_back({{"node", c}, {"label", NodeLabel(engine, c)}});
  json rows = json::array();
  for (size_t i = 0; i < heatmap.models.size(); ++i) {
    json cells = json::array();
    for (const auto& s : heatmap.cells[i]) cells.push_back(SliceStatsToJson(s));
    json row = {{"model", heatmap.models[i]}, {"cells", cells}};
    if (!heatmap.scores.empty()) row["score"] = heatmap.scores[i] ? json(*heatmap.scores[i]) : json(nullptr);
    rows.push_back(std::move(row));
  }
  return {{"schema_version", 1},
          {"snapshot", SnapshotJson(engine)},
          {"min_evals", min_evals},
          {"columns", columns},
          {"rows", rows},
          {"dropped_models", heatmap.dropped_models}};
}

std::vector<ReportFile> BuildReportBundle(const SliceEngine& engine, const ReportOptions& options) {
  std::vector<ReportFile> files;
  const auto lexicon = options.greeting_lexicon.empty() ? DefaultGreetingLexicon() : options.greeting_lexicon;
  const auto diag = ComputeCorpusDiagnostics(engine.dataset(), lexicon);
  json groups = json::array();
  for (const auto& g : diag.duplicate_groups) {
    groups.push_back({{"normalized_text", g.normalized_text}, {"count", g.count}, {"prompt_ids", g.prompt_ids}});
  }
  files.push_back({"diagnostics.json",
                   Pretty({{"schema_version", 1},
                           {"snapshot", SnapshotJson(engine)},
                           {"judgments", engine.dataset().size()},
                           {"prompts", engine.dataset().prompts().size()},
                           {"models", engine.models().size()},
                           {"outcome_shares",
                            {{"a", diag.outcome_shares.a}, {"b", diag.outcome_shares.b}, {"tie", diag.outcome_shares.tie}}},
                           {"duplicate_groups", groups},
                           {"greeting_count", diag.greeting_count},
                           {"greeting_judgment_count", diag.greeting_judgment_count},
                           {"greeting_decided_share", diag.greeting_decided_share}})});

  json notes = json::array();
  try {
    const auto div = engine.Divergence(options.divergence_level, options.smoothing, options.min_models_n);
    files.push_back({"divergence.csv", DivergenceCsv(engine, div)});
    files.push_back({"divergence.json", Pretty(DivergenceJson(engine, div))});
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kValidation) throw;
    notes.push_back(std::string("divergence skipped: ") + e.what());
  }
  const auto outliers = engine.Outliers(options.outlier_level, options.outlier_threshold);
  files.push_back({"outliers.csv", OutliersCsv(engine, outliers)});
  files.push_back({"outliers.json", Pretty(OutliersJson(engine, outliers, options.outlier_threshold))});
  files.push_back({"treemap.json", Pretty(TreemapJson(engine))});
  const auto heatmap = BuildHeatmap(engine, options);
  files.push_back({"heatmap.csv", HeatmapCsv(engine, heatmap)});
  files.push_back({"heatmap.json", Pretty(HeatmapJson(engine, heatmap, options.min_evals))});
  for (const auto& [name, report] : options.annotation_reports) {
    if (name.empty() || name.find_first_of("/\\") != std::string::npos) {
      throw ValidationError("bad annotation report name '" + name + "'");
    }
    auto j = report;
    j["snapshot"] = SnapshotJson(engine);
    files.push_back({"annotation_" + name + ".json", Pretty(j)});
  }
  if (options.spec) {
    auto table = RankingTableToJson(engine.WeightedRanking(*options.spec, options.smoothing, options.missing));
    table["snapshot"] = SnapshotJson(engine);
    files.push_back({"ranking.json", Pretty(table)});
  }

  json listing = json::array();
  for (const auto& f : files) listing.push_back({{"name", f.name}, {"sha256", Sha256Hex(f.content)}});
  json params = {{"min_evals", options.min_evals},
                 {"divergence_level", LevelName(options.divergence_level)},
                 {"min_models_n", options.min_models_n},
                 {"outlier_level", LevelName(options.outlier_level)},
                 {"outlier_threshold", options.outlier_threshold},
                 {"prior_strength", options.smoothing.strength},
                 {"spec_digest", options.spec ? json(SliceSpecDigest(*options.spec)) : json(nullptr)}};
  files.push_back({"manifest.json", Pretty({{"schema_version", 1},
                                            {"snapshot", SnapshotJson(engine)},
                                            {"files", listing},
                                            {"parameters", params},
                                            {"notes", notes}})});
  return files;
}

void WriteReportFiles(const std::vector<ReportFile>& files, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  for (const auto& f : files) {
    std::ofstream out(dir / f.name, std::ios::binary | std::ios::trunc);
    out << f.content;
    if (!out) throw IoError("cannot write " + (dir / f.name).string());
  }
}

}  // namespace slicerank
