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

#include "slicerank/dataset.h"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "slicerank/digest.h"
#include "slicerank/error.h"

namespace slicerank {

using nlohmann::json;

std::string_view OutcomeName(Outcome outcome) {
  switch (outcome) {
    case Outcome::kAWin:
      return "a_win";
    case Outcome::kBWin:
      return "b_win";
    case Outcome::kTie:
      return "tie";
    case Outcome::kBothBad:
      return "both_bad";
  }
  return "tie";
}

std::optional<Outcome> ParseOutcome(std::string_view name) {
  if (name == "a_win") return Outcome::kAWin;
  if (name == "b_win") return Outcome::kBWin;
  if (name == "tie") return Outcome::kTie;
  if (name == "both_bad") return Outcome::kBothBad;
  return std::nullopt;
}

namespace {

const std::string& RequireString(const json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end()) {
    throw ValidationError(std::string("missing key \"") + key + "\"");
  }
  if (!it->is_string()) {
    throw ValidationError(std::string("key \"") + key + "\" must be a string");
  }
  return it->get_ref<const std::string&>();
}

std::optional<std::string> OptionalString(const json& object, const char* key) {
  auto it = object.find(key);
  if (it == object.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) {
    throw ValidationError(std::string("key \"") + key + "\" must be a string");
  }
  return it->get<std::string>();
}

bool LooksLikeIso8601(const std::string& text) {
  static const std::regex kIso(
      R"(^\d{4}-\d{2}-\d{2}([T ]\d{2}:\d{2}(:\d{2}(\.\d+)?)?(Z|[+-]\d{2}:?\d{2})?)?$)");
  return std::regex_match(text, kIso);
}

}  // namespace

JudgmentRecord ParseRecord(const json& object) {
  if (!object.is_object()) throw ValidationError("record is not a JSON object");
  JudgmentRecord r;
  r.judgment_id = RequireString(object, "judgment_id");
  r.prompt_id = RequireString(object, "prompt_id");
  r.prompt_text = RequireString(object, "prompt");
  r.model_a.name = RequireString(object, "model_a");
  r.model_b.name = RequireString(object, "model_b");
  const std::string& outcome = RequireString(object, "outcome");
  auto parsed = ParseOutcome(outcome);
  if (!parsed) throw ValidationError("unknown outcome \"" + outcome + "\"");
  r.outcome = *parsed;

  if (r.judgment_id.empty()) throw ValidationError("empty judgment_id");
  if (r.prompt_id.empty()) throw ValidationError("empty prompt_id");
  if (r.prompt_text.empty()) throw ValidationError("empty prompt");
  if (r.model_a.name.empty() || r.model_b.name.empty()) {
    throw ValidationError("empty model name");
  }
  if (r.model_a == r.model_b) {
    throw ValidationError("model_a equals model_b (\"" + r.model_a.name + "\")");
  }

  if (auto language = OptionalString(object, "language")) {
    r.language = language->empty() ? "unknown" : *language;
  }
  if (auto it = object.find("tags"); it != object.end() && !it->is_null()) {
    if (!it->is_array()) throw ValidationError("key \"tags\" must be an array");
    for (const auto& tag : *it) {
      if (!tag.is_string()) throw ValidationError("tags must be strings");
      r.tags.insert(tag.get<std::string>());
    }
  }
  r.timestamp = OptionalString(object, "timestamp");
  if (r.timestamp && !LooksLikeIso8601(*r.timestamp)) {
    throw ValidationError("timestamp is not ISO-8601: \"" + *r.timestamp + "\"");
  }
  r.response_a = OptionalString(object, "response_a");
  r.response_b = OptionalString(object, "response_b");
  return r;
}

json RecordToJson(const JudgmentRecord& r) {
  json j = {
      {"judgment_id", r.judgment_id},
      {"prompt_id", r.prompt_id},
      {"prompt", r.prompt_text},
      {"model_a", r.model_a.name},
      {"model_b", r.model_b.name},
      {"outcome", std::string(OutcomeName(r.outcome))},
      {"language", r.language},
      {"tags", r.tags},
  };
  if (r.timestamp) j["timestamp"] = *r.timestamp;
  if (r.response_a) j["response_a"] = *r.response_a;
  if (r.response_b) j["response_b"] = *r.response_b;
  return j;
}

Dataset Dataset::FromRecords(std::vector<JudgmentRecord> records) {
  Dataset ds;
  std::set<ModelId> models;
  for (size_t i = 0; i < records.size(); ++i) {
    const JudgmentRecord& r = records[i];
    if (r.model_a == r.model_b) {
      throw ValidationError("judgment " + r.judgment_id +
                            ": model_a equals model_b");
    }
    if (r.prompt_text.empty()) {
      throw ValidationError("judgment " + r.judgment_id + ": empty prompt");
    }
    if (!ds.judgment_index_.emplace(r.judgment_id, i).second) {
      throw ValidationError("duplicate judgment_id \"" + r.judgment_id + "\"");
    }
    auto [it, inserted] = ds.prompts_.emplace(r.prompt_id, r.prompt_text);
    if (!inserted && it->second != r.prompt_text) {
      throw ValidationError("prompt_id \"" + r.prompt_id +
                            "\" maps to two different prompt texts");
    }
    models.insert(r.model_a);
    models.insert(r.model_b);
  }
  ds.models_.assign(models.begin(), models.end());
  ds.records_ = std::move(records);
  ds.digest_ = Sha256Hex(SerializeJsonl(ds));
  return ds;
}

std::optional<size_t> Dataset::FindJudgment(std::string_view judgment_id) const {
  auto it = judgment_index_.find(judgment_id);
  if (it == judgment_index_.end()) return std::nullopt;
  return it->second;
}

bool Dataset::HasModel(const ModelId& model) const {
  return std::binary_search(models_.begin(), models_.end(), model);
}

IngestResult IngestStream(std::istream& in, double max_invalid_fraction) {
  IngestResult result;
  std::vector<JudgmentRecord> records;
  std::map<std::string, size_t> seen_ids;
  std::map<std::string, std::string> prompt_texts;
  std::string line;
  size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++result.line_count;
    JudgmentRecord record;
    try {
      record = ParseRecord(json::parse(line));
    } catch (const json::exception& e) {
      result.invalid_lines.push_back({line_number, std::string("malformed JSON: ") + e.what()});
      continue;
    } catch (const Error& e) {
      result.invalid_lines.push_back({line_number, e.what()});
      continue;
    }
    if (auto [it, inserted] = seen_ids.emplace(record.judgment_id, line_number);
        !inserted) {
      throw ValidationError("duplicate judgment_id \"" + record.judgment_id +
                            "\" on lines " + std::to_string(it->second) +
                            " and " + std::to_string(line_number));
    }
    auto [pit, fresh] = prompt_texts.emplace(record.prompt_id, record.prompt_text);
    if (!fresh && pit->second != record.prompt_text) {
      result.invalid_lines.push_back(
          {line_number, "prompt_id \"" + record.prompt_id +
                            "\" already seen with a different prompt text"});
      continue;
    }
    records.push_back(std::move(record));
  }
  if (in.bad()) throw IoError("read error while ingesting");

  const double invalid = static_cast<double>(result.invalid_lines.size());
  if (result.line_count > 0 &&
      invalid > max_invalid_fraction * static_cast<double>(result.line_count)) {
    std::ostringstream msg;
    msg << result.invalid_lines.size() << " of " << result.line_count
        << " lines invalid (limit " << max_invalid_fraction * 100 << "%)";
    for (size_t i = 0; i < result.invalid_lines.size() && i < 5; ++i) {
      msg << "\n  line " << result.invalid_lines[i].line_number << ": "
          << result.invalid_lines[i].message;
    }
    throw ValidationError(msg.str());
  }
  result.dataset = Dataset::FromRecords(std::move(records));
  return result;
}

IngestResult Ingest(const std::filesystem::path& path, DatasetFormat format,
                    double max_invalid_fraction) {
  (void)format;  // JSONL is the only canonical format.
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file " + path.string());
  return IngestStream(in, max_invalid_fraction);
}

std::string SerializeJsonl(const Dataset& dataset) {
  std::string out;
  for (const auto& record : dataset.records()) {
    out += RecordToJson(record).dump();
    out.push_back('\n');
  }
  return out;
}

void WriteJsonl(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << SerializeJsonl(dataset);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace slicerank
