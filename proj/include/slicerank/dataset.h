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

#ifndef SLICERANK_DATASET_H_
#define SLICERANK_DATASET_H_

#include <compare>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace slicerank {

// Model identity; equality is exact, case-sensitive string match.
struct ModelId {
  std::string name;

  auto operator<=>(const ModelId&) const = default;
};

enum class Outcome { kAWin, kBWin, kTie, kBothBad };

// Wire names: "a_win", "b_win", "tie", "both_bad".
std::string_view OutcomeName(Outcome outcome);
std::optional<Outcome> ParseOutcome(std::string_view name);

inline bool IsDecided(Outcome outcome) {
  return outcome == Outcome::kAWin || outcome == Outcome::kBWin;
}

// One pairwise vote.
struct JudgmentRecord {
  std::string judgment_id;
  std::string prompt_id;
  std::string prompt_text;
  ModelId model_a;
  ModelId model_b;
  Outcome outcome = Outcome::kTie;
  std::string language = "unknown";
  std::set<std::string> tags;
  std::optional<std::string> timestamp;
  // Opaque response texts, only consumed by annotation jobs.
  std::optional<std::string> response_a;
  std::optional<std::string> response_b;

  bool Involves(const ModelId& model) const {
    return model_a == model || model_b == model;
  }
};

// Immutable, validated collection of judgments. Safe to share across threads
// once constructed.
class Dataset {
 public:
  Dataset() = default;

  // Validates the record and cross-record invariants (unique judgment ids,
  // prompt_id -> text consistency). Throws ValidationError.
  static Dataset FromRecords(std::vector<JudgmentRecord> records);

  const std::vector<JudgmentRecord>& records() const { return records_; }
  // Sorted by name.
  const std::vector<ModelId>& models() const { return models_; }
  const std::map<std::string, std::string>& prompts() const { return prompts_; }
  // SHA-256 of the canonical JSONL serialization.
  const std::string& source_digest() const { return digest_; }

  bool empty() const { return records_.empty(); }
  size_t size() const { return records_.size(); }

  std::optional<size_t> FindJudgment(std::string_view judgment_id) const;
  bool HasModel(const ModelId& model) const;

 private:
  std::vector<JudgmentRecord> records_;
  std::vector<ModelId> models_;
  std::map<std::string, std::string> prompts_;
  std::map<std::string, size_t, std::less<>> judgment_index_;
  std::string digest_;
};

enum class DatasetFormat { kJsonl };

struct InvalidLine {
  size_t line_number = 0;  // 1-based
  std::string message;
};

struct IngestResult {
  Dataset dataset;
  std::vector<InvalidLine> invalid_lines;
  size_t line_count = 0;  // non-blank lines seen
};

inline constexpr double kDefaultMaxInvalidFraction = 0.01;

// Reads one JSON record per line. Malformed lines are collected and skipped;
// the whole ingest fails with ValidationError when more than
// `max_invalid_fraction` of the non-blank lines are invalid, or on a duplicate
// judgment_id. Unreadable files raise IoError.
IngestResult Ingest(const std::filesystem::path& path,
                    DatasetFormat format = DatasetFormat::kJsonl,
                    double max_invalid_fraction = kDefaultMaxInvalidFraction);
IngestResult IngestStream(std::istream& in,
                          double max_invalid_fraction = kDefaultMaxInvalidFraction);

// Parses a single record object; throws ValidationError naming the problem.
JudgmentRecord ParseRecord(const nlohmann::json& object);
nlohmann::json RecordToJson(const JudgmentRecord& record);

// Canonical JSONL (sorted keys, one record per line, trailing newline).
std::string SerializeJsonl(const Dataset& dataset);
void WriteJsonl(const Dataset& dataset, const std::filesystem::path& path);

}  // namespace slicerank

#endif  // SLICERANK_DATASET_H_
