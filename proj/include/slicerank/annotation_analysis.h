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

#ifndef SLICERANK_ANNOTATION_ANALYSIS_H_
#define SLICERANK_ANNOTATION_ANALYSIS_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slicerank/annotation.h"
#include "slicerank/dataset.h"
#include "slicerank/providers.h"
#include "slicerank/stats.h"

namespace slicerank {

// Reports are pure functions of (label rows, dataset) and serialize with
// sorted keys, so identical inputs give identical bytes.

struct CorrectnessReport {
  size_t labeled_items = 0;
  size_t agreement_case_count = 0;  // every panelist agrees on both flags
  size_t split_case_count = 0;      // exactly one response correct
  size_t both_correct_count = 0;
  size_t both_incorrect_count = 0;
  double split_case_share = 0.0;
  double both_correct_share = 0.0;
  double both_incorrect_share = 0.0;
  // Over decided split cases: the winner is the correct response.
  size_t decided_split_cases = 0;
  std::optional<double> human_picked_correct_share;
  // Over both-correct cases: a winner was chosen anyway.
  std::optional<double> decided_despite_both_correct_share;
  // Per-model accuracy vs per-model win rate over agreed cases.
  std::optional<double> correctness_preference_spearman;
  size_t spearman_models = 0;
  std::vector<std::string> notes;
};

// Throws ValidationError when a row is not math_correctness, the panel has
// fewer than two providers, an item is not a judgment in `ds`, or no case is
// agreed.
CorrectnessReport CorrectnessPreference(const std::vector<LabelRow>& labels, const Dataset& ds);
nlohmann::json ToJson(const CorrectnessReport& r);

struct TraitFrequency {
  size_t count = 0;
  double share = 0.0;
};

struct StyleOverlapReport {
  // "decided_both_correct" when correctness labels were supplied, else "decided".
  std::string restriction;
  size_t analyzed_pairs = 0;
  std::optional<double> mean_jaccard_decided_both_correct;
  size_t random_pairs = 0;
  std::optional<double> mean_jaccard_random_pairs;
  size_t winners = 0;
  std::map<std::string, TraitFrequency> winning_trait_frequencies;
  std::vector<std::string> notes;
};

struct StyleOverlapOptions {
  // Optional math_correctness rows restricting pairs to agreed both-correct cases.
  const std::vector<LabelRow>* correctness = nullptr;
  // prompt id -> category; responses in the random baseline are paired within
  // a category. Absent prompts share one category.
  const std::map<std::string, std::string>* categories = nullptr;
  uint64_t seed = 0;
};

// Traits held by each response of one style_tagging row: a trait belongs to A
// when tagged model_a or Both.
std::pair<std::set<std::string>, std::set<std::string>> ResponseTraits(const LabelRow& row);

// Throws ValidationError on empty input or rows of another task.
StyleOverlapReport StyleOverlap(const std::vector<LabelRow>& labels, const Dataset& ds,
                                const StyleOverlapOptions& options = {});
nlohmann::json ToJson(const StyleOverlapReport& r);

struct HeadToHead {
  int64_t pluralistic_wins = 0;
  int64_t non_pluralistic_wins = 0;
  int64_t cases = 0;
  double pluralistic_share = 0.0;
  double non_pluralistic_share = 0.0;
  double binomial_p = 1.0;  // exact two-sided, p0 = 0.5
  stats::Interval interval;  // Wilson interval on non_pluralistic_share
};

HeadToHead HeadToHeadFromCounts(int64_t non_pluralistic_wins, int64_t cases);
nlohmann::json ToJson(const HeadToHead& h);

// Compares an observed head-to-head with the reference split (44 of 81
// decided cases won by the non-pluralistic side, reported p = 0.25).
nlohmann::json HeadToHeadAnchor(const HeadToHead& observed);

struct RankShift {
  int overall_rank = 0;
  int sensitive_rank = 0;
  int rank_drop = 0;  // positive: lower in the sensitive slice
  double overall_rate = 0.0;
  double sensitive_rate = 0.0;
};

struct PluralismReport {
  size_t labeled_items = 0;
  size_t sensitive_judgment_count = 0;
  size_t sensitive_prompt_count = 0;
  double non_pluralistic_share = 0.0;    // over responses to sensitive judgments
  std::optional<double> refusal_share;  // when refusal flags were labeled
  std::optional<HeadToHead> head_to_head;
  std::map<std::string, double> per_model_non_pluralistic_rates;
  std::map<std::string, RankShift> rank_drop_per_model;
  std::vector<std::string> notes;
};

// Rank shifts use Beta-Binomial smoothed rates with each model's overall rate
// as prior and `prior_strength` pseudo-observations (0: raw rates).
PluralismReport Pluralism(const std::vector<LabelRow>& labels, const Dataset& ds,
                          double prior_strength = 10.0);
nlohmann::json ToJson(const PluralismReport& r);

struct HumanLabel {
  std::string item_id;
  std::string rater;
  nlohmann::json labels;  // field -> value
};

std::vector<HumanLabel> LoadHumanLabels(const std::filesystem::path& path);

struct AgreementAuditReport {
  std::string field;
  size_t shared_items = 0;
  std::optional<double> krippendorff_alpha_human_vs_machine;
  std::optional<double> alpha_machines_only;
  std::optional<double> alpha_humans_only;
  std::vector<std::string> notes;
};

// Human-vs-machine alpha treats the human majority and the machine majority
// of each shared item as two raters. Throws ValidationError when no item
// carries the field in both sources.
AgreementAuditReport AgreementAudit(const std::vector<HumanLabel>& humans,
                                    const std::vector<LabelRow>& machines, const std::string& field);
nlohmann::json ToJson(const AgreementAuditReport& r);

struct TraitSample {
  std::string prompt;
  std::string response_a;
  std::string response_b;
};

// Records carrying both response texts, in dataset order.
std::vector<TraitSample> SamplesFromDataset(const Dataset& ds);

struct DiscoveryConfig {
  int rounds = 10;
  int sample_size = 20;
  uint64_t seed = 0;
};

struct DiscoveryRound {
  int round = 0;
  std::vector<size_t> sample_indices;
  std::string prompt_sha256;
  std::vector<std::string> traits;  // normalized, unique
  std::string error;
};

struct DiscoveredTrait {
  std::string trait;
  int count = 0;  // rounds naming it
};

struct DiscoveryResult {
  std::vector<DiscoveredTrait> vocabulary;  // count desc, then name
  std::vector<DiscoveryRound> rounds;
  bool confirmed = false;  // set by a human before use in tagging jobs
};

// Lowercase, runs of non-alphanumerics to '_', trimmed.
std::string NormalizeTraitName(std::string_view name);

// Seeded sampling per round, then a union of normalized names with counts.
// A failed round is recorded and skipped. Throws ValidationError when the
// sample is smaller than sample_size, ProviderError when every round fails.
DiscoveryResult DiscoverTraits(const std::vector<TraitSample>& samples, Provider& provider,
                               const DiscoveryConfig& config);
nlohmann::json ToJson(const DiscoveryResult& r);

// Reads a discovery file and returns its vocabulary. Throws ValidationError
// unless "confirmed" is true.
std::vector<std::string> LoadConfirmedVocabulary(const std::filesystem::path& path);

}  // namespace slicerank

#endif  // SLICERANK_ANNOTATION_ANALYSIS_H_
