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

#ifndef SLICERANK_ANNOTATION_H_
#define SLICERANK_ANNOTATION_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "slicerank/dataset.h"
#include "slicerank/providers.h"

namespace slicerank {

enum class TaskKind {
  kMathDeterministicFilter,
  kMathCorrectness,
  kStyleTagging,
  kPluralismLabel,
  kPoliticsCategory,
};

std::string_view TaskName(TaskKind task);
std::optional<TaskKind> ParseTaskKind(std::string_view name);

// Voting tasks need an odd panel of at least three.
bool IsVotingTask(TaskKind task);
// Prompt-level tasks target prompt ids, the rest target judgment ids.
bool IsPromptLevelTask(TaskKind task);

// The six explanation-style traits tagged per response.
const std::vector<std::string>& DefaultStyleTraits();

struct AnnotationJob {
  std::string job_id;
  TaskKind task = TaskKind::kPluralismLabel;
  std::string template_id;  // empty: the task's own template
  std::vector<ProviderConfig> panel;
  std::vector<std::string> targets;
  std::filesystem::path output;
  // Closed trait vocabulary for style tagging.
  std::vector<std::string> vocabulary = DefaultStyleTraits();
  int max_in_flight = 4;
  double max_failure_fraction = 0.10;

  const std::string& effective_template() const;
};

// Throws ValidationError: empty id/targets/output, duplicate targets, panel
// size rules, template placeholders outside the task's record fields.
void ValidateJob(const AnnotationJob& job);

AnnotationJob AnnotationJobFromJson(const nlohmann::json& j);

struct PanelOutput {
  std::string provider;
  std::string raw;
  std::optional<nlohmann::json> parsed;  // object of label fields
  std::string error;                     // empty when parsed
};

struct LabelRow {
  std::string item_id;
  std::string task;
  std::string job_id;
  std::string template_id;
  std::string prompt_sha256;
  std::vector<PanelOutput> panel;
  // field -> strict-majority value, null when no value holds a majority.
  nlohmann::json majority = nlohmann::json::object();
  // field -> providers whose value differs from the majority.
  nlohmann::json dissent = nlohmann::json::object();
  bool failed = false;

  bool Unanimous() const;
};

nlohmann::json LabelRowToJson(const LabelRow& row);
LabelRow LabelRowFromJson(const nlohmann::json& j);
std::vector<LabelRow> LoadLabels(const std::filesystem::path& path);
void WriteLabels(const std::vector<LabelRow>& rows, const std::filesystem::path& path);

// Parses one provider completion for a task. Throws ProviderError when the
// output is not valid for the task (wrong keys, out-of-vocabulary traits,
// wrong value types).
nlohmann::json ParseTaskOutput(TaskKind task, std::string_view raw,
                               const std::vector<std::string>& vocabulary = DefaultStyleTraits());

// Per-field strict majority and dissent over successfully parsed outputs.
void ComputeMajority(LabelRow& row);

// Re-derives the mode of each field from the stored panel outputs and checks
// it against row.majority.
bool MajorityMatchesPanel(const LabelRow& row);

struct JobSummary {
  size_t targets = 0;
  size_t skipped = 0;  // already completed in the output file
  size_t labeled = 0;
  size_t failed = 0;
  size_t provider_calls = 0;
  bool aborted = false;
};

// Labels every target not already completed in job.output. Rows are appended
// as they finish, then the file is rewritten in target order. Failed items
// are retried on the next run. Throws ProviderError once failures exceed
// job.max_failure_fraction of the targets; rows written so far are kept.
JobSummary RunJob(const AnnotationJob& job, const Dataset& ds,
                  const std::vector<Provider*>& panel);
JobSummary RunJob(const AnnotationJob& job, const Dataset& ds);

}  // namespace slicerank

#endif  // SLICERANK_ANNOTATION_H_
