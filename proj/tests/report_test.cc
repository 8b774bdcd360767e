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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "golden.h"
#include "slicerank/digest.h"
#include "slicerank/error.h"
#include "slicerank/service.h"
#include "test_util.h"

namespace slicerank {
namespace {

using nlohmann::json;
using testing::FixturePath;

std::shared_ptr<const Snapshot> Fixture() {
  return LoadSnapshot(FixturePath("snapshot_dataset.jsonl"), FixturePath("snapshot_hierarchy.json"));
}

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

const ReportFile& Find(const std::vector<ReportFile>& files, const std::string& name) {
  for (const auto& f : files) {
    if (f.name == name) return f;
  }
  throw std::runtime_error("missing " + name);
}

ReportOptions SmallOptions() {
  ReportOptions o;
  o.min_evals = 0;
  return o;
}

TEST(CsvTest, QuotesOnlyWhenNeeded) {
  EXPECT_EQ(CsvField("plain"), "plain");
  EXPECT_EQ(CsvField("a,b"), "\"a,b\"");
  EXPECT_EQ(CsvField("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(CsvField("two\nlines"), "\"two\nlines\"");
  EXPECT_EQ(CsvNumber(std::nullopt), "");
  EXPECT_EQ(CsvNumber(0.25), "0.25");
}

TEST(ReportTest, TreemapSizesArePromptCounts) {
  const auto snap = Fixture();
  const auto tree = TreemapJson(*snap->engine);
  // Independent count from the raw hierarchy assignment.
  const auto raw = json::parse(std::ifstream(FixturePath("snapshot_hierarchy.json")));
  std::set<std::string> prompts;
  {
    std::ifstream in(FixturePath("snapshot_dataset.jsonl"));
    for (std::string line; std::getline(in, line);) prompts.insert(json::parse(line)["prompt_id"].get<std::string>());
  }
  size_t assigned = 0;
  for (const auto& p : prompts) assigned += raw["assignment"].contains(p) ? 1 : 0;
  EXPECT_EQ(tree["total_prompts"].get<size_t>(), prompts.size());
  EXPECT_EQ(tree["assigned_prompts"].get<size_t>(), assigned);
  EXPECT_EQ(tree["unassigned_prompts"].get<size_t>(), prompts.size() - assigned);

  size_t root_sum = 0;
  std::function<void(const json&)> check = [&](const json& n) {
    if (n["children"].empty()) return;
    size_t sum = 0;
    for (const auto& c : n["children"]) {
      sum += c["size"].get<size_t>();
      check(c);
    }
    EXPECT_EQ(sum, n["size"].get<size_t>()) << n["id"];
  };
  for (const auto& r : tree["roots"]) {
    root_sum += r["size"].get<size_t>();
    check(r);
  }
  EXPECT_EQ(root_sum, assigned);
  EXPECT_EQ(tree["snapshot"]["dataset_digest"], snap->dataset_digest());
}

TEST(ReportTest, HeatmapCellsMatchEngine) {
  const auto snap = Fixture();
  const auto opts = SmallOptions();
  const auto h = BuildHeatmap(*snap->engine, opts);
  EXPECT_EQ(h.columns, snap->hierarchy->NodesAtLevel(Level::kMid));
  ASSERT_EQ(h.models.size(), snap->engine->models().size());
  for (size_t i = 0; i < h.models.size(); ++i) {
    for (size_t c = 0; c < h.columns.size(); ++c) {
      const auto want = snap->engine->StatsFor(h.models[i], h.columns[c], opts.smoothing);
      EXPECT_EQ(h.cells[i][c].counts, want.counts);
      EXPECT_EQ(h.cells[i][c].smoothed_rate, want.smoothed_rate);
    }
  }
  const auto csv = Lines(HeatmapCsv(*snap->engine, h));
  ASSERT_GE(csv.size(), 3u);
  EXPECT_EQ(csv[0].rfind("# dataset_digest: " + snap->dataset_digest(), 0), 0u);
  EXPECT_EQ(csv[1].rfind("# hierarchy_digest: " + snap->hierarchy_digest(), 0), 0u);
  EXPECT_EQ(csv[2], "model,node,label,smoothed_rate,raw_rate,n_effective,wins,losses,ties");
  EXPECT_EQ(csv.size(), 3 + h.models.size() * h.columns.size());
}

TEST(ReportTest, MinEvalsDropsSmallModels) {
  const auto snap = Fixture();
  auto opts = SmallOptions();
  std::map<std::string, int64_t> totals;
  for (const auto& m : snap->engine->models()) totals[m] = snap->engine->OverallCounts(m).total();
  int64_t lo = INT64_MAX, hi = 0;
  for (const auto& [m, t] : totals) {
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  ASSERT_LT(lo, hi) << "fixture needs uneven model totals";
  opts.min_evals = hi;
  const auto h = BuildHeatmap(*snap->engine, opts);
  for (const auto& m : h.models) EXPECT_GE(totals[m], hi);
  for (const auto& m : h.dropped_models) EXPECT_LT(totals[m], hi);
  EXPECT_EQ(h.models.size() + h.dropped_models.size(), totals.size());
  EXPECT_FALSE(h.dropped_models.empty());

  opts.min_evals = -1;
  EXPECT_THROW(BuildHeatmap(*snap->engine, opts), Error);
}

TEST(ReportTest, SpecColumnsAndScores) {
  const auto snap = Fixture();
  auto opts = SmallOptions();
  auto parsed = ParseSliceSpec(json::parse(R"({"included":[{"node":"m1","weight":2},{"node":"m3","weight":1}]})"),
                               *snap->hierarchy);
  ASSERT_TRUE(parsed.spec);
  opts.spec = parsed.spec;
  const auto h = BuildHeatmap(*snap->engine, opts);
  EXPECT_EQ(h.columns, (std::vector<std::string>{"m1", "m3"}));
  const auto table = snap->engine->WeightedRanking(*parsed.spec, opts.smoothing, opts.missing);
  ASSERT_EQ(h.models.size(), table.rows.size());
  for (size_t i = 0; i < h.models.size(); ++i) {
    EXPECT_EQ(h.models[i], table.rows[i].model);
    EXPECT_EQ(h.scores[i], table.rows[i].score);
  }
  const auto files = BuildReportBundle(*snap->engine, opts);
  const auto ranking = json::parse(Find(files, "ranking.json").content);
  EXPECT_EQ(ranking["spec_digest"], SliceSpecDigest(*parsed.spec));
}

TEST(ReportTest, BundleManifestHashesEveryFile) {
  const auto snap = Fixture();
  const auto files = BuildReportBundle(*snap->engine, SmallOptions());
  ASSERT_EQ(files.back().name, "manifest.json");
  const auto manifest = json::parse(files.back().content);
  ASSERT_EQ(manifest["files"].size(), files.size() - 1);
  for (size_t i = 0; i + 1 < files.size(); ++i) {
    EXPECT_EQ(manifest["files"][i]["name"], files[i].name);
    EXPECT_EQ(manifest["files"][i]["sha256"], Sha256Hex(files[i].content));
    if (files[i].name.ends_with(".json")) {
      const auto j = json::parse(files[i].content);
      EXPECT_EQ(j["snapshot"]["dataset_digest"], snap->dataset_digest()) << files[i].name;
      EXPECT_EQ(j["snapshot"]["hierarchy_digest"], snap->hierarchy_digest()) << files[i].name;
    } else {
      EXPECT_EQ(files[i].content.rfind("# dataset_digest: ", 0), 0u) << files[i].name;
    }
  }
  for (const char* name : {"diagnostics.json", "outliers.csv", "outliers.json", "treemap.json", "heatmap.csv",
                           "heatmap.json"}) {
    EXPECT_NO_THROW(Find(files, name)) << name;
  }
  // Same inputs, same bytes.
  const auto again = BuildReportBundle(*snap->engine, SmallOptions());
  ASSERT_EQ(again.size(), files.size());
  for (size_t i = 0; i < files.size(); ++i) EXPECT_EQ(again[i].content, files[i].content);
}

TEST(ReportTest, DivergenceCsvGolden) {
  const auto snap = Fixture();
  const auto files = BuildReportBundle(*snap->engine, SmallOptions());
  testing::ExpectGolden("divergence.csv", Find(files, "divergence.csv").content);
  testing::ExpectGolden("heatmap.csv", Find(files, "heatmap.csv").content);
}

TEST(ReportTest, AnnotationReportsCarryDigests) {
  const auto snap = Fixture();
  auto opts = SmallOptions();
  opts.annotation_reports["pluralism"] = {{"labeled_items", 3}};
  const auto files = BuildReportBundle(*snap->engine, opts);
  const auto j = json::parse(Find(files, "annotation_pluralism.json").content);
  EXPECT_EQ(j["labeled_items"], 3);
  EXPECT_EQ(j["snapshot"]["hierarchy_digest"], snap->hierarchy_digest());
  opts.annotation_reports = {{"../escape", json::object()}};
  EXPECT_THROW(BuildReportBundle(*snap->engine, opts), Error);
}

TEST(ReportTest, WritesFiles) {
  const auto snap = Fixture();
  const auto files = BuildReportBundle(*snap->engine, SmallOptions());
  testing::TempDir dir;
  WriteReportFiles(files, dir.path() / "out");
  for (const auto& f : files) {
    std::ifstream in(dir.path() / "out" / f.name, std::ios::binary);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    EXPECT_EQ(content, f.content);
  }
}

}  // namespace
}  // namespace slicerank
