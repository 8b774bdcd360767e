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

#include "slicerank/slice_engine.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "slicerank/digest.h"
#include "slicerank/error.h"

namespace slicerank {

using nlohmann::json;

namespace {

constexpr double kMinPrior = 1e-3;

bool IsAll(std::string_view node) { return node == kAllNode; }

std::string JoinErrors(const std::vector<FieldError>& errors) {
  std::string out = "invalid slice spec:";
  for (const auto& e : errors) out += " " + e.field + ": " + e.message + ";";
  out.pop_back();
  return out;
}

json Optional(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

SmoothingPolicy ParseSmoothingPolicy(std::string_view prior_mean, double strength) {
  if (!(strength >= 0.0) || !std::isfinite(strength)) {
    throw ValidationError("prior strength must be a finite number >= 0");
  }
  SmoothingPolicy policy;
  policy.strength = strength;
  if (prior_mean == "global") {
    policy.mode = PriorMode::kGlobal;
  } else if (prior_mean == "per-model") {
    policy.mode = PriorMode::kPerModel;
  } else {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(prior_mean.data(), prior_mean.data() + prior_mean.size(), value);
    if (ec != std::errc() || ptr != prior_mean.data() + prior_mean.size() || !(value > 0.0 && value < 1.0)) {
      throw ValidationError("prior mean must be 'global', 'per-model' or a number in (0, 1), got '" +
                            std::string(prior_mean) + "'");
    }
    policy.mode = PriorMode::kFixed;
    policy.fixed_mean = value;
  }
  return policy;
}

std::optional<CellFilter> ParseCellFilter(std::string_view name) {
  if (name == "wins") return CellFilter::kWins;
  if (name == "losses") return CellFilter::kLosses;
  if (name == "ties") return CellFilter::kTies;
  if (name == "all") return CellFilter::kAll;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// SliceSpec

std::vector<FieldError> ValidateSliceSpec(const SliceSpec& spec, const TopicHierarchy& h) {
  std::vector<FieldError> errors;
  auto exists = [&](const std::string& id) { return IsAll(id) || h.Find(id) != nullptr; };
  std::set<std::string> excluded_fines;
  size_t j = 0;
  for (const auto& e : spec.excluded) {
    const std::string field = "excluded[" + std::to_string(j++) + "]";
    if (IsAll(e)) {
      errors.push_back({field, "cannot exclude every prompt"});
    } else if (h.Find(e) == nullptr) {
      errors.push_back({field, "unknown node '" + e + "'"});
    } else {
      for (auto& f : h.FineDescendants(e)) excluded_fines.insert(f);
    }
  }
  if (spec.included.empty()) errors.push_back({"included", "must name at least one node"});
  std::set<std::string> seen;
  for (size_t i = 0; i < spec.included.size(); ++i) {
    const auto& inc = spec.included[i];
    const std::string field = "included[" + std::to_string(i) + "]";
    if (!(inc.weight > 0.0) || !std::isfinite(inc.weight)) {
      errors.push_back({field + ".weight", "weight for node '" + inc.node + "' must be a positive number"});
    }
    if (!exists(inc.node)) {
      errors.push_back({field + ".node", "unknown node '" + inc.node + "'"});
      continue;
    }
    if (!seen.insert(inc.node).second) {
      errors.push_back({field + ".node", "node '" + inc.node + "' is included twice"});
    }
    if (spec.excluded.contains(inc.node)) {
      errors.push_back({field + ".node", "node '" + inc.node + "' is both included and excluded"});
    } else if (!excluded_fines.empty()) {
      const auto fines = IsAll(inc.node) ? h.NodesAtLevel(Level::kFine) : h.FineDescendants(inc.node);
      const bool all_gone = std::all_of(fines.begin(), fines.end(),
                                        [&](const std::string& f) { return excluded_fines.contains(f); });
      if (all_gone) {
        errors.push_back({field + ".node", "node '" + inc.node + "' lies entirely inside excluded subtrees"});
      }
    }
  }
  if (spec.min_n < 0) errors.push_back({"min_n", "must be >= 0"});
  return errors;
}

SpecParse ParseSliceSpec(const json& j, const TopicHierarchy& h) {
  SpecParse out;
  if (!j.is_object()) {
    out.errors.push_back({"", "slice spec must be a JSON object"});
    return out;
  }
  SliceSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key != "included" && key != "excluded" && key != "min_n") {
      out.errors.push_back({key, "unknown field"});
    }
  }
  if (!j.contains("included") || !j["included"].is_array()) {
    out.errors.push_back({"included", "must be an array of {\"node\", \"weight\"} objects"});
  } else {
    for (size_t i = 0; i < j["included"].size(); ++i) {
      const json& item = j["included"][i];
      const std::string field = "included[" + std::to_string(i) + "]";
      if (!item.is_object() || !item.contains("node") || !item["node"].is_string()) {
        out.errors.push_back({field + ".node", "must be a string"});
        continue;
      }
      SliceSpec::Included inc;
      inc.node = item["node"];
      if (item.contains("weight")) {
        if (!item["weight"].is_number()) {
          out.errors.push_back({field + ".weight", "weight for node '" + inc.node + "' must be a number"});
          continue;
        }
        inc.weight = item["weight"].get<double>();
      }
      spec.included.push_back(std::move(inc));
    }
  }
  if (j.contains("excluded")) {
    if (!j["excluded"].is_array()) {
      out.errors.push_back({"excluded", "must be an array of node ids"});
    } else {
      for (size_t i = 0; i < j["excluded"].size(); ++i) {
        if (!j["excluded"][i].is_string()) {
          out.errors.push_back({"excluded[" + std::to_string(i) + "]", "must be a string"});
        } else {
          spec.excluded.insert(j["excluded"][i].get<std::string>());
        }
      }
    }
  }
  if (j.contains("min_n")) {
    if (!j["min_n"].is_number_integer()) {
      out.errors.push_back({"min_n", "must be an integer"});
    } else {
      spec.min_n = j["min_n"].get<int64_t>();
    }
  }
  if (!out.errors.empty()) return out;
  out.errors = ValidateSliceSpec(spec, h);
  if (out.errors.empty()) out.spec = std::move(spec);
  return out;
}

json SliceSpecToJson(const SliceSpec& spec) {
  json included = json::array();
  for (const auto& inc : spec.included) included.push_back({{"node", inc.node}, {"weight", inc.weight}});
  return {{"included", included}, {"excluded", spec.excluded}, {"min_n", spec.min_n}};
}

std::string SliceSpecDigest(const SliceSpec& spec) {
  double total = 0.0;
  for (const auto& inc : spec.included) total += inc.weight;
  SliceSpec canonical = spec;
  for (auto& inc : canonical.included) inc.weight = total > 0.0 ? inc.weight / total : inc.weight;
  return Sha256Hex(SliceSpecToJson(canonical).dump());
}

// ---------------------------------------------------------------------------
// JSON views

json SliceStatsToJson(const ModelSliceStats& s) {
  json interval = nullptr;
  if (s.interval) {
    interval = {{"low", s.interval->low}, {"high", s.interval->high}, {"level", s.interval->level}};
  }
  return {{"model", s.model},
          {"node", s.node},
          {"wins", s.counts.wins},
          {"losses", s.counts.losses},
          {"ties", s.counts.ties},
          {"n_effective", s.n_effective()},
          {"raw_rate", Optional(s.raw_rate)},
          {"smoothed_rate", Optional(s.smoothed_rate)},
          {"interval", interval},
          {"deviation_z", Optional(s.deviation_z)}};
}

json RankingTableToJson(const RankingTable& t) {
  json columns = json::array();
  for (size_t i = 0; i < t.columns.size(); ++i) {
    columns.push_back({{"node", t.columns[i]}, {"weight", t.weights[i]}});
  }
  json rows = json::array();
  for (size_t i = 0; i < t.rows.size(); ++i) {
    const auto& r = t.rows[i];
    json cells = json::array();
    for (const auto& c : r.cells) cells.push_back(SliceStatsToJson(c));
    rows.push_back({{"rank", i + 1},
                    {"model", r.model},
                    {"score", Optional(r.score)},
                    {"n_effective", r.n_effective},
                    {"below_min_n", r.below_min_n},
                    {"missing_nodes", r.missing_nodes},
                    {"cells", cells}});
  }
  return {{"schema_version", kRankingSchemaVersion},
          {"spec_digest", t.spec_digest},
          {"columns", columns},
          {"rows", rows},
          {"tie_break_trace", t.tie_break_trace}};
}

json JudgmentViewToJson(const JudgmentView& v) {
  return {{"judgment_id", v.judgment_id},
          {"prompt_id", v.prompt_id},
          {"prompt", v.prompt},
          {"model_a", v.model_a},
          {"model_b", v.model_b},
          {"outcome", OutcomeName(v.outcome)},
          {"timestamp", v.timestamp ? json(*v.timestamp) : json(nullptr)},
          {"opponent", v.opponent},
          {"result", v.result}};
}

// ---------------------------------------------------------------------------
// SliceEngine

SliceEngine::SliceEngine(std::shared_ptr<const Dataset> dataset,
                         std::shared_ptr<const TopicHierarchy> hierarchy)
    : dataset_(std::move(dataset)), hierarchy_(std::move(hierarchy)) {
  for (const auto& m : dataset_->models()) {
    model_index_[m.name] = models_.size();
    models_.push_back(m.name);
  }
  fines_ = hierarchy_->NodesAtLevel(Level::kFine);
  for (size_t f = 0; f < fines_.size(); ++f) fine_index_[fines_[f]] = f;
  const size_t nm = models_.size();
  counts_.assign(fines_.size() * nm, {});
  overall_.assign(nm, {});
  assigned_total_.assign(nm, {});
  fine_records_.assign(fines_.size(), {});
  fine_prompts_.assign(fines_.size(), {});

  const auto& assignment = hierarchy_->assignment();
  for (const auto& [prompt, text] : dataset_->prompts()) {
    auto it = assignment.find(prompt);
    if (it != assignment.end()) fine_prompts_[fine_index_.at(it->second)].push_back(prompt);
  }
  const auto& records = dataset_->records();
  for (size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const size_t a = model_index_.at(r.model_a.name);
    const size_t b = model_index_.at(r.model_b.name);
    stats::WinLoss da;
    stats::WinLoss db;
    if (r.outcome == Outcome::kAWin) {
      da.wins = 1, db.losses = 1;
    } else if (r.outcome == Outcome::kBWin) {
      db.wins = 1, da.losses = 1;
    } else {
      da.ties = 1, db.ties = 1;
    }
    overall_[a] += da;
    overall_[b] += db;
    auto it = assignment.find(r.prompt_id);
    if (it == assignment.end()) continue;
    const size_t f = fine_index_.at(it->second);
    counts_[f * nm + a] += da;
    counts_[f * nm + b] += db;
    assigned_total_[a] += da;
    assigned_total_[b] += db;
    fine_records_[f].push_back(i);
  }
  // Pooled over judgments every decision is one win and one loss, so the
  // global prior is the unweighted mean of per-model win rates instead.
  double rate_sum = 0.0;
  size_t rated = 0;
  for (const auto& wl : overall_) {
    if (wl.decided() == 0) continue;
    rate_sum += stats::WinRate(wl);
    ++rated;
  }
  if (rated > 0) global_mean_ = rate_sum / static_cast<double>(rated);
}

bool SliceEngine::HasModel(std::string_view model) const { return model_index_.contains(model); }

size_t SliceEngine::ModelIndex(std::string_view model) const {
  auto it = model_index_.find(model);
  if (it == model_index_.end()) throw NotFoundError("unknown model '" + std::string(model) + "'");
  return it->second;
}

std::optional<std::vector<size_t>> SliceEngine::FineSet(std::string_view node,
                                                        const std::set<size_t>& excluded) const {
  std::vector<size_t> out;
  if (IsAll(node)) {
    if (excluded.empty()) return std::nullopt;
    for (size_t f = 0; f < fines_.size(); ++f) {
      if (!excluded.contains(f)) out.push_back(f);
    }
    return out;
  }
  hierarchy_->At(node);  // throws NotFoundError
  for (const auto& id : hierarchy_->FineDescendants(node)) {
    const size_t f = fine_index_.at(id);
    if (!excluded.contains(f)) out.push_back(f);
  }
  return out;
}

std::vector<stats::WinLoss> SliceEngine::SumCounts(
    const std::optional<std::vector<size_t>>& fines) const {
  if (!fines) return overall_;
  const size_t nm = models_.size();
  std::vector<stats::WinLoss> out(nm);
  for (size_t f : *fines) {
    for (size_t m = 0; m < nm; ++m) out[m] += counts_[f * nm + m];
  }
  return out;
}

std::map<std::string, stats::WinLoss> SliceEngine::SliceCounts(std::string_view node) const {
  const auto sums = SumCounts(FineSet(node));
  std::map<std::string, stats::WinLoss> out;
  for (size_t m = 0; m < models_.size(); ++m) {
    if (sums[m].total() > 0) out[models_[m]] = sums[m];
  }
  return out;
}

stats::WinLoss SliceEngine::Counts(std::string_view model, std::string_view node) const {
  const size_t m = ModelIndex(model);
  const auto fines = FineSet(node);
  if (!fines) return overall_[m];
  stats::WinLoss out;
  for (size_t f : *fines) out += counts_[f * models_.size() + m];
  return out;
}

stats::WinLoss SliceEngine::OverallCounts(std::string_view model) const {
  return overall_[ModelIndex(model)];
}

size_t SliceEngine::PromptCount(std::string_view node) const {
  const auto fines = FineSet(node);
  if (!fines) return dataset_->prompts().size();
  size_t n = 0;
  for (size_t f : *fines) n += fine_prompts_[f].size();
  return n;
}

size_t SliceEngine::JudgmentCount(std::string_view node) const {
  const auto fines = FineSet(node);
  if (!fines) return dataset_->size();
  size_t n = 0;
  for (size_t f : *fines) n += fine_records_[f].size();
  return n;
}

double SliceEngine::PriorMean(std::string_view model, const SmoothingPolicy& policy) const {
  double p0 = 0.5;
  switch (policy.mode) {
    case PriorMode::kGlobal:
      p0 = global_mean_;
      break;
    case PriorMode::kFixed:
      p0 = policy.fixed_mean;
      break;
    case PriorMode::kPerModel: {
      const auto& overall = overall_[ModelIndex(model)];
      if (overall.decided() > 0) p0 = stats::WinRate(overall);
      break;
    }
  }
  return std::clamp(p0, kMinPrior, 1.0 - kMinPrior);
}

std::optional<double> SliceEngine::SmoothedRate(std::string_view model,
                                                const stats::WinLoss& counts,
                                                const SmoothingPolicy& policy) const {
  if (policy.strength == 0.0) {
    if (counts.decided() == 0) return std::nullopt;
    return stats::WinRate(counts);
  }
  return stats::SmoothedWinRate(counts, {PriorMean(model, policy), policy.strength});
}

std::optional<double> SliceEngine::DeviationZ(size_t m,
                                              const std::optional<std::vector<size_t>>& fines,
                                              const stats::WinLoss& in_node) const {
  if (!fines || in_node.decided() == 0) return std::nullopt;
  const stats::WinLoss rest = assigned_total_[m] - in_node;
  if (rest.decided() == 0) return std::nullopt;
  return stats::TwoProportionZ(in_node.wins, in_node.decided(), rest.wins, rest.decided());
}

ModelSliceStats SliceEngine::StatsFor(std::string_view model, std::string_view node,
                                      const SmoothingPolicy& policy) const {
  const size_t m = ModelIndex(model);
  const auto fines = FineSet(node);
  ModelSliceStats s;
  s.model = std::string(model);
  s.node = std::string(node);
  if (fines) {
    for (size_t f : *fines) s.counts += counts_[f * models_.size() + m];
  } else {
    s.counts = overall_[m];
  }
  if (s.counts.decided() > 0) {
    s.raw_rate = stats::WinRate(s.counts);
    s.interval = stats::WilsonInterval(s.counts);
  }
  s.smoothed_rate = SmoothedRate(model, s.counts, policy);
  s.deviation_z = DeviationZ(m, fines, s.counts);
  return s;
}

RankingTable SliceEngine::WeightedRanking(const SliceSpec& spec, const SmoothingPolicy& policy,
                                          MissingSlicePolicy missing) const {
  const auto errors = ValidateSliceSpec(spec, *hierarchy_);
  if (!errors.empty()) throw ValidationError(JoinErrors(errors));

  std::set<size_t> excluded;
  for (const auto& e : spec.excluded) {
    for (const auto& f : hierarchy_->FineDescendants(e)) excluded.insert(fine_index_.at(f));
  }
  RankingTable table;
  table.spec_digest = SliceSpecDigest(spec);
  double total_weight = 0.0;
  for (const auto& inc : spec.included) total_weight += inc.weight;
  std::vector<std::optional<std::vector<size_t>>> fine_sets;
  std::vector<std::vector<stats::WinLoss>> sums;
  bool any_data = false;
  for (const auto& inc : spec.included) {
    table.columns.push_back(inc.node);
    table.weights.push_back(inc.weight / total_weight);
    fine_sets.push_back(FineSet(inc.node, excluded));
    sums.push_back(SumCounts(fine_sets.back()));
    for (const auto& wl : sums.back()) any_data = any_data || wl.decided() > 0;
  }
  if (!any_data) throw ValidationError("no decisions in the selected slices");

  const size_t ns = spec.included.size();
  for (size_t m = 0; m < models_.size(); ++m) {
    RankingRow row;
    row.model = models_[m];
    double num = 0.0;
    double den = 0.0;
    for (size_t s = 0; s < ns; ++s) {
      ModelSliceStats cell;
      cell.model = models_[m];
      cell.node = table.columns[s];
      cell.counts = sums[s][m];
      if (cell.counts.decided() > 0) {
        cell.raw_rate = stats::WinRate(cell.counts);
        cell.interval = stats::WilsonInterval(cell.counts);
      }
      cell.smoothed_rate = SmoothedRate(models_[m], cell.counts, policy);
      cell.deviation_z = DeviationZ(m, fine_sets[s], cell.counts);
      row.n_effective += cell.counts.decided();
      const double w = table.weights[s];
      if (cell.counts.decided() > 0) {
        num += w * *cell.smoothed_rate;
        den += w;
      } else {
        row.missing_nodes.push_back(cell.node);
        if (missing == MissingSlicePolicy::kScoreZero) {
          den += w;
        } else if (missing == MissingSlicePolicy::kPriorImpute) {
          num += w * PriorMean(models_[m], policy);
          den += w;
        }
      }
      row.cells.push_back(std::move(cell));
    }
    if (row.n_effective > 0 && den > 0.0) row.score = num / den;
    row.below_min_n = row.n_effective < spec.min_n;
    table.rows.push_back(std::move(row));
  }

  std::sort(table.rows.begin(), table.rows.end(), [](const RankingRow& a, const RankingRow& b) {
    if (a.score.has_value() != b.score.has_value()) return a.score.has_value();
    if (a.score && *a.score != *b.score) return *a.score > *b.score;
    if (a.score && a.n_effective != b.n_effective) return a.n_effective > b.n_effective;
    return a.model < b.model;
  });
  for (size_t i = 1; i < table.rows.size(); ++i) {
    const auto& a = table.rows[i - 1];
    const auto& b = table.rows[i];
    if (!a.score || !b.score || *a.score != *b.score) continue;
    std::string how = a.n_effective != b.n_effective
                          ? "n_effective " + std::to_string(a.n_effective) + " > " + std::to_string(b.n_effective)
                          : "model name";
    table.tie_break_trace.push_back(a.model + " and " + b.model + " tie on score " +
                                    json(*a.score).dump() + "; ordered by " + how);
  }
  return table;
}

DivergenceRow SliceEngine::DivergenceFor(std::string_view node, const SmoothingPolicy& policy,
                                         int64_t min_models_n) const {
  const int64_t floor_n = std::max<int64_t>(1, min_models_n);
  const auto sums = SumCounts(FineSet(node));
  DivergenceRow row;
  row.node = std::string(node);
  row.label = IsAll(node) ? "All prompts" : hierarchy_->At(node).label;
  std::vector<double> node_rates;
  std::vector<double> overall_rates;
  for (size_t m = 0; m < models_.size(); ++m) {
    if (overall_[m].decided() < floor_n || sums[m].decided() < floor_n) continue;
    row.n_per_model[models_[m]] = sums[m].decided();
    node_rates.push_back(*SmoothedRate(models_[m], sums[m], policy));
    overall_rates.push_back(*SmoothedRate(models_[m], overall_[m], policy));
  }
  row.models_used = node_rates.size();
  if (row.models_used < 2) {
    row.note = "insufficient data";
    return row;
  }
  try {
    row.spearman = stats::Spearman(node_rates, overall_rates);
  } catch (const Error& e) {
    row.note = std::string("undefined: ") + e.what();
  }
  return row;
}

DivergenceReport SliceEngine::Divergence(Level level, const SmoothingPolicy& policy,
                                         int64_t min_models_n) const {
  const int64_t floor_n = std::max<int64_t>(1, min_models_n);
  const auto qualified = std::count_if(overall_.begin(), overall_.end(),
                                       [&](const stats::WinLoss& wl) { return wl.decided() >= floor_n; });
  if (qualified < 2) {
    throw ValidationError("divergence needs at least two models with " + std::to_string(floor_n) +
                          " decisions overall");
  }
  DivergenceReport report;
  report.level = level;
  for (const auto& node : hierarchy_->NodesAtLevel(level)) {
    report.rows.push_back(DivergenceFor(node, policy, min_models_n));
  }
  std::stable_sort(report.rows.begin(), report.rows.end(), [](const DivergenceRow& a, const DivergenceRow& b) {
    if (a.spearman.has_value() != b.spearman.has_value()) return a.spearman.has_value();
    if (a.spearman && *a.spearman != *b.spearman) return *a.spearman < *b.spearman;
    return false;
  });
  return report;
}

OutlierReport SliceEngine::Outliers(Level level, double threshold) const {
  if (!(threshold > 0.0)) throw ValidationError("outlier threshold must be > 0");
  OutlierReport report;
  for (const auto& node : hierarchy_->NodesAtLevel(level)) {
    const auto fines = FineSet(node);
    const auto sums = SumCounts(fines);
    for (size_t m = 0; m < models_.size(); ++m) {
      const auto& in = sums[m];
      if (in.decided() == 0) continue;
      const stats::WinLoss rest = assigned_total_[m] - in;
      if (rest.decided() == 0) {
        report.notes.push_back(models_[m] + " in " + node + ": no decisions elsewhere, skipped");
        continue;
      }
      const auto z = stats::TwoProportionZ(in.wins, in.decided(), rest.wins, rest.decided());
      if (!z) {
        report.notes.push_back(models_[m] + " in " + node +
                               ": degenerate pooled proportion, skipped");
        continue;
      }
      if (std::abs(*z) >= threshold) report.cells.push_back({models_[m], node, *z, in, rest});
    }
  }
  std::stable_sort(report.cells.begin(), report.cells.end(),
                   [](const OutlierCell& a, const OutlierCell& b) { return std::abs(a.z) > std::abs(b.z); });
  return report;
}

std::vector<size_t> SliceEngine::RecordsUnder(std::string_view node) const {
  const auto fines = FineSet(node);
  std::vector<size_t> out;
  if (!fines) {
    out.resize(dataset_->size());
    std::iota(out.begin(), out.end(), size_t{0});
    return out;
  }
  for (size_t f : *fines) out.insert(out.end(), fine_records_[f].begin(), fine_records_[f].end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<JudgmentView> SliceEngine::CellExamples(std::string_view model, std::string_view node,
                                                    CellFilter filter, size_t limit) const {
  ModelIndex(model);
  const auto& records = dataset_->records();
  std::vector<size_t> picked;
  for (size_t i : RecordsUnder(node)) {
    const auto& r = records[i];
    const bool is_a = r.model_a.name == model;
    if (!is_a && r.model_b.name != model) continue;
    const bool won = (is_a && r.outcome == Outcome::kAWin) || (!is_a && r.outcome == Outcome::kBWin);
    const bool lost = (is_a && r.outcome == Outcome::kBWin) || (!is_a && r.outcome == Outcome::kAWin);
    const bool tied = !IsDecided(r.outcome);
    if ((filter == CellFilter::kWins && !won) || (filter == CellFilter::kLosses && !lost) ||
        (filter == CellFilter::kTies && !tied)) {
      continue;
    }
    picked.push_back(i);
  }
  std::sort(picked.begin(), picked.end(), [&](size_t x, size_t y) {
    const auto& tx = records[x].timestamp;
    const auto& ty = records[y].timestamp;
    if (tx.has_value() != ty.has_value()) return tx.has_value();
    if (tx && *tx != *ty) return *tx > *ty;
    return x > y;
  });
  if (picked.size() > limit) picked.resize(limit);
  std::vector<JudgmentView> out;
  for (size_t i : picked) {
    const auto& r = records[i];
    const bool is_a = r.model_a.name == model;
    JudgmentView v{r.judgment_id, r.prompt_id,   r.prompt_text, r.model_a.name, r.model_b.name,
                   r.outcome,     r.timestamp,   is_a ? r.model_b.name : r.model_a.name, "tie"};
    if (IsDecided(r.outcome)) v.result = (is_a == (r.outcome == Outcome::kAWin)) ? "win" : "loss";
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> SliceEngine::CategoryExamples(
    std::string_view node, size_t limit, uint64_t seed) const {
  std::vector<std::string> prompts;
  const auto fines = FineSet(node);
  if (!fines) {
    for (const auto& [id, text] : dataset_->prompts()) prompts.push_back(id);
  } else {
    for (size_t f : *fines) prompts.insert(prompts.end(), fine_prompts_[f].begin(), fine_prompts_[f].end());
  }
  std::sort(prompts.begin(), prompts.end(), [&](const std::string& a, const std::string& b) {
    const uint64_t ha = Fnv1a64(a, seed);
    const uint64_t hb = Fnv1a64(b, seed);
    return ha != hb ? ha < hb : a < b;
  });
  if (prompts.size() > limit) prompts.resize(limit);
  std::sort(prompts.begin(), prompts.end());
  std::vector<std::pair<std::string, std::string>> out;
  for (auto& id : prompts) out.emplace_back(id, dataset_->prompts().at(id));
  return out;
}

std::vector<StripPosition> SliceEngine::StripPositions(std::string_view model, Level level,
                                                       const SmoothingPolicy& policy) const {
  const size_t target = ModelIndex(model);
  std::vector<StripPosition> out;
  for (const auto& node : hierarchy_->NodesAtLevel(level)) {
    const auto sums = SumCounts(FineSet(node));
    StripPosition pos;
    pos.node = node;
    pos.label = hierarchy_->At(node).label;
    std::vector<double> rates;
    for (size_t m = 0; m < models_.size(); ++m) {
      if (sums[m].decided() == 0) continue;
      const double rate = *SmoothedRate(models_[m], sums[m], policy);
      rates.push_back(rate);
      if (m == target) pos.smoothed_rate = rate;
    }
    pos.models_ranked = static_cast<int>(rates.size());
    if (pos.smoothed_rate) {
      pos.rank = 1 + static_cast<int>(std::count_if(rates.begin(), rates.end(),
                                                    [&](double r) { return r > *pos.smoothed_rate; }));
    }
    out.push_back(std::move(pos));
  }
  return out;
}

}  // namespace slicerank
