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

#ifndef SLICERANK_HIERARCHY_BUILDER_H_
#define SLICERANK_HIERARCHY_BUILDER_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slicerank/dataset.h"
#include "slicerank/embedding.h"
#include "slicerank/hierarchy.h"
#include "slicerank/kmeans.h"
#include "slicerank/providers.h"

namespace slicerank {

// A provider failure for one input; the batch carries on without it.
struct ItemError {
  size_t index = 0;
  std::string message;
};

struct DescribeResult {
  std::vector<std::optional<std::string>> descriptions;
  std::vector<ItemError> errors;
};

// One topic description per prompt. Throws ValidationError on empty input.
DescribeResult DescribeTopics(const std::vector<std::string>& prompts, Provider& provider,
                              int max_in_flight = 4);

// Throws ValidationError on empty input, ProviderError on failure.
EmbeddingMatrix EmbedTexts(const std::vector<std::string>& texts, Provider& provider);

struct ClusterLabel {
  std::string label;
  std::string description;
  std::vector<std::string> keywords;
};

// IN: members closest to the centroid. OUT: nearest non-members.
struct ClusterExamples {
  std::vector<std::string> in;
  std::vector<std::string> out;
};

std::vector<ClusterExamples> SelectClusterExamples(const EmbeddingMatrix& vectors,
                                                   const KMeansResult& clustering,
                                                   const std::vector<std::string>& texts,
                                                   size_t in_count = 10, size_t out_count = 5);

struct LabelResult {
  std::vector<std::optional<ClusterLabel>> labels;
  std::vector<ItemError> errors;
};

// Throws ValidationError when a cluster has no IN examples.
LabelResult LabelClusters(const std::vector<ClusterExamples>& clusters, Provider& provider,
                          int max_in_flight = 4);

// Replayable manual refinement applied after provider grouping.
struct ManualEdit {
  enum class Op { kAddTop, kAddMid, kReassignFine, kReassignMid };
  Op op = Op::kAddMid;
  std::string id;      // add_*: new node id; reassign_*: node to move
  std::string target;  // add_mid / reassign_*: new parent
  std::string label;
  std::string description;
};
using ManualEditScript = std::vector<ManualEdit>;

// JSON array of {"op": "add_top"|"add_mid"|"reassign_fine"|"reassign_mid", ...}.
// add_top: id, label. add_mid: id, label, parent. reassign_*: node, to.
ManualEditScript ParseEditScript(const nlohmann::json& j);
ManualEditScript LoadEditScript(const std::filesystem::path& path);

struct HigherLevels {
  // FINE nodes f0..f{n-1} (index order of `fine_labels`) under MIDs and TOPs;
  // the assignment is empty.
  TopicHierarchy hierarchy;
  std::vector<std::string> warnings;
};

// Asks the provider to group FINE labels into MID and TOP categories, then
// replays `edits`. A TOP count outside [6, 10] is a warning. Clusters the
// provider leaves out land in an "Unsorted" MID. Categories left without
// children are pruned with a warning. Throws ValidationError for an edit
// naming an unknown node (the message names it) or breaking the level rules.
HigherLevels BuildHigherLevels(const std::vector<ClusterLabel>& fine_labels, Provider& provider,
                               const ManualEditScript& edits);

struct BuildConfig {
  ClusteringConfig clustering;
  int max_in_flight = 4;
  size_t in_examples = 10;
  size_t out_examples = 5;
};

struct BuildResult {
  TopicHierarchy hierarchy;
  // Deterministic build log (no wall-clock fields).
  nlohmann::json log;
};

// describe -> embed -> k-means -> label -> group -> edits. Prompts are taken
// in prompt_id order. A prompt whose description fails is embedded from its
// own text.
BuildResult BuildHierarchy(const Dataset& dataset, Provider& label_provider,
                           Provider& embedding_provider, const BuildConfig& config,
                           const ManualEditScript& edits = {});

struct KSweepRow {
  int k = 0;
  // Share of compared (model pair, cluster) cells whose 95% Wilson intervals
  // overlap; empty when no pair could be compared.
  std::optional<double> overlap_probability;
  size_t pairs_compared = 0;
  double mean_cluster_size = 0.0;
};

// For each k: cluster `vectors` (row i = prompt_ids[i]) and, within every
// cluster, compare each pair of the `top_models` best models by overall raw
// win rate that both have decisions there. Rows follow `ks`.
std::vector<KSweepRow> KSweep(const Dataset& dataset, const std::vector<std::string>& prompt_ids,
                              const EmbeddingMatrix& vectors, const std::vector<int>& ks,
                              const ClusteringConfig& base, size_t top_models = 20);

struct AgreementResult {
  double agreement = 0.0;
  std::optional<double> kappa;
  size_t prompts_compared = 0;
};

// Labels every prompt high/low by whether its MID is in the lowest or highest
// `band` fraction of per-MID divergence scores (Spearman rho; low rho = high
// divergence), per run. Agreement and kappa are computed over prompts labeled
// in both runs. Throws ValidationError for band outside (0, 0.5], fewer than
// two scored MIDs, disjoint prompt sets, or no prompt labeled in both runs.
AgreementResult HierarchyAgreement(const TopicHierarchy& run_a, const TopicHierarchy& run_b,
                                   const std::map<std::string, double>& divergence_a,
                                   const std::map<std::string, double>& divergence_b,
                                   double band);

}  // namespace slicerank

#endif  // SLICERANK_HIERARCHY_BUILDER_H_
