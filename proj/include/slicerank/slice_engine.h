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

#ifndef SLICERANK_SLICE_ENGINE_H_
#define SLICERANK_SLICE_ENGINE_H_

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "slicerank/dataset.h"
#include "slicerank/hierarchy.h"
#include "slicerank/stats.h"

namespace slicerank {

// Pseudo-node covering every prompt in the dataset, assigned or not.
inline constexpr std::string_view kAllNode = "__all__";

enum class PriorMode {
  kGlobal,    // unweighted mean of per-model win rates
  kPerModel,  // the model's own dataset-wide win rate (empirical Bayes)
  kFixed,     // SmoothingPolicy::fixed_mean
};

struct SmoothingPolicy {
  PriorMode mode = PriorMode::kPerModel;
  double fixed_mean = 0.5;
  // Pseudo-observations m. Zero disables smoothing (raw rates).
  double strength = 10.0;
};

// Parses "global", "per-model" or a number in (0, 1) for --prior-mean.
SmoothingPolicy ParseSmoothingPolicy(std::string_view prior_mean, double strength);

// How a model without decisions in an included node is scored.
enum class MissingSlicePolicy {
  kDropAndRenormalize,  // node leaves both sums for that model (default)
  kScoreZero,           // counts as rate 0 at full weight
  kPriorImpute,         // counts as the model's prior mean
};

struct SliceSpec {
  struct Included {
    std::string node;
    double weight = 1.0;
  };
  std::vector<Included> included;
  std::set<std::string> excluded;
  int64_t min_n = 0;
};

struct FieldError {
  std::string field;  // e.g. "included[0].weight"
  std::string message;
};

// Parses and validates against `hierarchy`: weights finite and > 0, nodes
// exist, no node both included and excluded, no duplicate included node, no
// included node lying wholly inside an excluded subtree, min_n >= 0.
struct SpecParse {
  std::optional<SliceSpec> spec;
  std::vector<FieldError> errors;
};
SpecParse ParseSliceSpec(const nlohmann::json& j, const TopicHierarchy& hierarchy);
std::vector<FieldError> ValidateSliceSpec(const SliceSpec& spec, const TopicHierarchy& hierarchy);
nlohmann::json SliceSpecToJson(const SliceSpec& spec);

// SHA-256 of the canonical spec with weights divided by their sum, so specs
// differing only by a common weight factor share a digest.
std::string SliceSpecDigest(const SliceSpec& spec);

struct ModelSliceStats {
  std::string model;
  std::string node;
  stats::WinLoss counts;
  std::optional<double> raw_rate;       // empty without decisions
  std::optional<double> smoothed_rate;  // empty only when unsmoothed and no decisions
  std::optional<stats::Interval> interval;
  // Node vs the model's record over the rest of the hierarchy.
  std::optional<double> deviation_z;
  int64_t n_effective() const { return counts.decided(); }
};

struct RankingRow {
  std::string model;
  std::optional<double> score;  // empty: no data in any included node
  int64_t n_effective = 0;
  bool below_min_n = false;
  std::vector<ModelSliceStats> cells;      // one per included node, spec order
  std::vector<std::string> missing_nodes;  // included nodes without decisions
};

struct RankingTable {
  std::vector<std::string> columns;
  std::vector<double> weights;  // normalized to sum 1
  std::vector<RankingRow> rows;
  std::string spec_digest;
  std::vector<std::string> tie_break_trace;
};

inline constexpr int kRankingSchemaVersion = 1;
nlohmann::json RankingTableToJson(const RankingTable& table);
nlohmann::json SliceStatsToJson(const ModelSliceStats& stats);

struct DivergenceRow {
  std::string node;
  std::string label;
  std::optional<double> spearman;
  size_t models_used = 0;
  std::map<std::string, int64_t> n_per_model;
  std::string note;  // "insufficient data" or why rho is undefined
};

// Rows ascending by rho (most divergent first); undefined rows last.
struct DivergenceReport {
  Level level = Level::kMid;
  std::vector<DivergenceRow> rows;
};

struct OutlierCell {
  std::string model;
  std::string node;
  double z = 0.0;
  stats::WinLoss in_node;
  stats::WinLoss rest;
};

struct OutlierReport {
  std::vector<OutlierCell> cells;  // |z| descending
  std::vector<std::string> notes;  // skipped degenerate cells
};

enum class CellFilter { kWins, kLosses, kTies, kAll };
std::optional<CellFilter> ParseCellFilter(std::string_view name);

struct JudgmentView {
  std::string judgment_id;
  std::string prompt_id;
  std::string prompt;
  std::string model_a;
  std::string model_b;
  Outcome outcome = Outcome::kTie;
  std::optional<std::string> timestamp;
  std::string opponent;
  std::string result;  // "win" | "loss" | "tie" from the cell model's side
};
nlohmann::json JudgmentViewToJson(const JudgmentView& view);

struct StripPosition {
  std::string node;
  std::string label;
  std::optional<int> rank;  // 1-based, ties share the minimum rank
  int models_ranked = 0;
  std::optional<double> smoothed_rate;
};

// Per-(FINE node, model) win/loss counts precomputed over an immutable
// (Dataset, TopicHierarchy) pair. Higher nodes are summed on demand. All
// methods are const and safe to call concurrently.
class SliceEngine {
 public:
  SliceEngine(std::shared_ptr<const Dataset> dataset,
              std::shared_ptr<const TopicHierarchy> hierarchy);

  const Dataset& dataset() const { return *dataset_; }
  const TopicHierarchy& hierarchy() const { return *hierarchy_; }
  const std::vector<std::string>& models() const { return models_; }
  bool HasModel(std::string_view model) const;

  // Throws NotFoundError for an unknown node. kAllNode is accepted.
  std::map<std::string, stats::WinLoss> SliceCounts(std::string_view node) const;
  stats::WinLoss Counts(std::string_view model, std::string_view node) const;
  stats::WinLoss OverallCounts(std::string_view model) const;

  // Distinct dataset prompts under `node`.
  size_t PromptCount(std::string_view node) const;
  size_t JudgmentCount(std::string_view node) const;

  double PriorMean(std::string_view model, const SmoothingPolicy& policy) const;
  std::optional<double> SmoothedRate(std::string_view model, const stats::WinLoss& counts,
                                     const SmoothingPolicy& policy) const;
  ModelSliceStats StatsFor(std::string_view model, std::string_view node,
                           const SmoothingPolicy& policy) const;

  // Throws ValidationError (field messages joined) for an invalid spec or
  // when no included node has any decision.
  RankingTable WeightedRanking(
      const SliceSpec& spec, const SmoothingPolicy& policy,
      MissingSlicePolicy missing = MissingSlicePolicy::kDropAndRenormalize) const;

  // Per node at `level`, Spearman between smoothed node rates and smoothed
  // overall rates over models with >= max(min_models_n, 1) decisions both
  // overall and in the node. Throws ValidationError when fewer than two
  // models qualify overall.
  DivergenceReport Divergence(Level level, const SmoothingPolicy& policy,
                              int64_t min_models_n) const;
  // The same computation for a single node (or kAllNode).
  DivergenceRow DivergenceFor(std::string_view node, const SmoothingPolicy& policy,
                              int64_t min_models_n) const;

  // Cells with |z| >= threshold. Throws ValidationError for threshold <= 0.
  OutlierReport Outliers(Level level, double threshold) const;

  // Newest first (timestamp, then input order); records without a timestamp
  // come after dated ones. Throws NotFoundError for unknown model or node.
  std::vector<JudgmentView> CellExamples(std::string_view model, std::string_view node,
                                         CellFilter filter, size_t limit) const;

  // Up to `limit` distinct prompts under node, a seeded deterministic sample
  // returned in prompt-id order.
  std::vector<std::pair<std::string, std::string>> CategoryExamples(std::string_view node,
                                                                    size_t limit,
                                                                    uint64_t seed = 0) const;

  // Throws NotFoundError for an unknown model.
  std::vector<StripPosition> StripPositions(std::string_view model, Level level,
                                            const SmoothingPolicy& policy) const;

 private:
  // FINE indices under node minus excluded subtrees; nullopt means kAllNode.
  std::optional<std::vector<size_t>> FineSet(std::string_view node,
                                             const std::set<size_t>& excluded = {}) const;
  std::vector<stats::WinLoss> SumCounts(const std::optional<std::vector<size_t>>& fines) const;
  std::vector<size_t> RecordsUnder(std::string_view node) const;
  size_t ModelIndex(std::string_view model) const;
  std::optional<double> DeviationZ(size_t model, const std::optional<std::vector<size_t>>& fines,
                                   const stats::WinLoss& in_node) const;

  std::shared_ptr<const Dataset> dataset_;
  std::shared_ptr<const TopicHierarchy> hierarchy_;
  std::vector<std::string> models_;
  std::map<std::string, size_t, std::less<>> model_index_;
  std::vector<std::string> fines_;
  std::map<std::string, size_t, std::less<>> fine_index_;
  // counts_[fine * models + model]
  std::vector<stats::WinLoss> counts_;
  std::vector<stats::WinLoss> overall_;
  std::vector<stats::WinLoss> assigned_total_;
  std::vector<std::vector<size_t>> fine_records_;
  std::vector<std::vector<std::string>> fine_prompts_;
  double global_mean_ = 0.5;
};

}  // namespace slicerank

#endif  // SLICERANK_SLICE_ENGINE_H_
