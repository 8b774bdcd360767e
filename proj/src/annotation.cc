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

#include "slicerank/annotation.h"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include "slicerank/digest.h"
#include "slicerank/error.h"
#include "slicerank/parallel.h"
#include "slicerank/templates.h"

namespace slicerank {

using json = nlohmann::json;

namespace {

struct TaskInfo {
  TaskKind kind;
  std::string name;
};

const std::vector<TaskInfo>& Tasks() {
  static const std::vector<TaskInfo> kTasks = {
      {TaskKind::kMathDeterministicFilter, "math_deterministic_filter"},
      {TaskKind::kMathCorrectness, "math_correctness"},
      {TaskKind::kStyleTagging, "style_tagging"},
      {TaskKind::kPluralismLabel, "pluralism_label"},
      {TaskKind::kPoliticsCategory, "politics_category"},
  };
  return kTasks;
}

const std::vector<std::string>& PoliticsCategoryNames() {
  static const std::vector<std::string> kNames = {
      "issues_related_to_china",         "human_rights_issues",
      "geopolitics_history_explanation", "geopolitical_conflicts",
      "normative_value_judgments",       "future_predictions"};
  return kNames;
}

bool RequireBool(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_boolean()) {
    throw ProviderError("output field '" + key + "' must be a boolean");
  }
  return it->get<bool>();
}

void RejectUnknownKeys(const json& obj, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ProviderError("unexpected output field '" + key + "'");
  }
}

// Fields a task's template may reference.
std::set<std::string> RecordFields(TaskKind task) {
  if (IsPromptLevelTask(task)) return {"prompt"};
  return {"prompt", "model_a_response", "model_b_response"};
}

TemplateVars ItemVars(TaskKind task, const Dataset& ds, const std::string& item) {
  if (IsPromptLevelTask(task)) {
    auto it = ds.prompts().find(item);
    if (it == ds.prompts().end()) throw ValidationError("unknown prompt id '" + item + "'");
    return {{"prompt", it->second}};
  }
  auto idx = ds.FindJudgment(item);
  if (!idx) throw ValidationError("unknown judgment id '" + item + "'");
  const auto& r = ds.records()[*idx];
  if (!r.response_a || !r.response_b) {
    throw ValidationError("judgment '" + item + "' has no response texts");
  }
  return {{"prompt", r.prompt_text}, {"model_a_response", *r.response_a},
          {"model_b_response", *r.response_b}};
}

void WriteLine(std::ofstream& out, const LabelRow& row) {
  out << LabelRowToJson(row).dump() << '\n';
  out.flush();
}

}  // namespace

std::string_view TaskName(TaskKind task) {
  for (const auto& t : Tasks()) {
    if (t.kind == task) return t.name;
  }
  return "unknown";
}

std::optional<TaskKind> ParseTaskKind(std::string_view name) {
  for (const auto& t : Tasks()) {
    if (t.name == name) return t.kind;
  }
  return std::nullopt;
}

bool IsVotingTask(TaskKind task) {
  return task == TaskKind::kPluralismLabel || task == TaskKind::kPoliticsCategory;
}

bool IsPromptLevelTask(TaskKind task) { return task == TaskKind::kMathDeterministicFilter; }

const std::vector<std::string>& DefaultStyleTraits() {
  static const std::vector<std::string> kTraits = {
      "conciseness",       "elaboration",
      "structure_richness", "reasoning_with_derivation",
      "rigorous_assumption_handling", "user_oriented_interaction"};
  return kTraits;
}

const std::string& AnnotationJob::effective_template() const {
  static const std::map<TaskKind, std::string> kDefaults = [] {
    std::map<TaskKind, std::string> m;
    for (const auto& t : Tasks()) m[t.kind] = t.name;
    return m;
  }();
  return template_id.empty() ? kDefaults.at(task) : template_id;
}

void ValidateJob(const AnnotationJob& job) {
  if (job.job_id.empty()) throw ValidationError("job_id must not be empty");
  if (job.targets.empty()) throw ValidationError("job has no targets");
  if (job.output.empty()) throw ValidationError("job has no output path");
  std::set<std::string> seen;
  for (const auto& t : job.targets) {
    if (!seen.insert(t).second) throw ValidationError("duplicate target '" + t + "'");
  }
  const size_t n = job.panel.size();
  if (IsVotingTask(job.task)) {
    if (n < 3 || n % 2 == 0) {
      throw ValidationError(std::string(TaskName(job.task)) +
                            " is a voting task and needs an odd panel of at least 3, got " +
                            std::to_string(n));
    }
  } else if (n == 0) {
    throw ValidationError("panel must not be empty");
  }
  for (const auto& p : job.panel) p.Validate();
  if (job.max_in_flight < 1) throw ValidationError("max_in_flight must be at least 1");
  if (!(job.max_failure_fraction >= 0.0 && job.max_failure_fraction <= 1.0)) {
    throw ValidationError("max_failure_fraction must be in [0, 1]");
  }
  const auto fields = RecordFields(job.task);
  for (const auto& ph : Placeholders(TemplateText(job.effective_template()))) {
    if (!fields.contains(ph)) {
      throw ValidationError("template '" + job.effective_template() + "' placeholder {" + ph +
                            "} is not a field of " + std::string(TaskName(job.task)) + " items");
    }
  }
  if (job.task == TaskKind::kStyleTagging) {
    if (job.vocabulary.empty()) throw ValidationError("style vocabulary must not be empty");
    std::set<std::string> v(job.vocabulary.begin(), job.vocabulary.end());
    if (v.size() != job.vocabulary.size()) throw ValidationError("style vocabulary has duplicates");
  }
}

AnnotationJob AnnotationJobFromJson(const json& j) {
  static const std::set<std::string> kKeys = {"job_id",  "task",       "template_id",
                                              "panel",   "targets",    "output",
                                              "vocabulary", "max_in_flight", "max_failure_fraction"};
  if (!j.is_object()) throw ValidationError("annotation job must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!kKeys.contains(k)) throw ValidationError("annotation job: unknown key '" + k + "'");
  }
  AnnotationJob job;
  try {
    job.job_id = j.at("job_id").get<std::string>();
    const auto task_name = j.at("task").get<std::string>();
    auto task = ParseTaskKind(task_name);
    if (!task) throw ValidationError("annotation job: unknown task '" + task_name + "'");
    job.task = *task;
    job.template_id = j.value("template_id", std::string());
    for (const auto& p : j.at("panel")) job.panel.push_back(ProviderConfigFromJson(p));
    job.targets = j.value("targets", std::vector<std::string>{});
    job.output = j.at("output").get<std::string>();
    if (j.contains("vocabulary")) job.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
    job.max_in_flight = j.value("max_in_flight", job.max_in_flight);
    job.max_failure_fraction = j.value("max_failure_fraction", job.max_failure_fraction);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("annotation job: ") + e.what());
  }
  return job;
}

bool LabelRow::Unanimous() const {
  if (failed || panel.empty()) return false;
  for (const auto& [field, value] : dissent.items()) {
    if (!value.empty()) return false;
  }
  for (const auto& [field, value] : majority.items()) {
    if (value.is_null()) return false;
  }
  return true;
}

json LabelRowToJson(const LabelRow& row) {
  json panel = json::array();
  for (const auto& p : row.panel) {
    json o = {{"provider", p.provider}, {"raw", p.raw}, {"parsed", nullptr}};
    if (p.parsed) o["parsed"] = *p.parsed;
    if (!p.error.empty()) o["error"] = p.error;
    panel.push_back(std::move(o));
  }
  return {{"item_id", row.item_id},         {"task", row.task},
          {"job_id", row.job_id},           {"template_id", row.template_id},
          {"prompt_sha256", row.prompt_sha256}, {"panel", std::move(panel)},
          {"majority", row.majority},       {"dissent", row.dissent},
          {"status", row.failed ? "failed" : "ok"}};
}

LabelRow LabelRowFromJson(const json& j) {
  LabelRow row;
  try {
    row.item_id = j.at("item_id").get<std::string>();
    row.task = j.at("task").get<std::string>();
    row.job_id = j.value("job_id", std::string());
    row.template_id = j.value("template_id", std::string());
    row.prompt_sha256 = j.value("prompt_sha256", std::string());
    for (const auto& p : j.at("panel")) {
      PanelOutput out;
      out.provider = p.at("provider").get<std::string>();
      out.raw = p.value("raw", std::string());
      if (p.contains("parsed") && !p.at("parsed").is_null()) out.parsed = p.at("parsed");
      out.error = p.value("error", std::string());
      row.panel.push_back(std::move(out));
    }
    row.majority = j.at("majority");
    row.dissent = j.value("dissent", json::object());
    const auto status = j.value("status", std::string("ok"));
    if (status != "ok" && status != "failed") throw ValidationError("unknown status '" + status + "'");
    row.failed = status == "failed";
  } catch (const json::exception& e) {
    throw ValidationError(std::string("label row: ") + e.what());
  }
  if (!row.majority.is_object()) throw ValidationError("label row: majority must be an object");
  return row;
}

std::vector<LabelRow> LoadLabels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open label file " + path.string());
  std::vector<LabelRow> rows;
  std::string line;
  size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(LabelRowFromJson(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw ValidationError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    } catch (const Error& e) {
      throw ValidationError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return rows;
}

void WriteLabels(const std::vector<LabelRow>& rows, const std::filesystem::path& path) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    for (const auto& r : rows) out << LabelRowToJson(r).dump() << '\n';
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

json ParseTaskOutput(TaskKind task, std::string_view raw, const std::vector<std::string>& vocabulary) {
  const json j = ExtractJson(raw);
  if (!j.is_object()) throw ProviderError("output must be a JSON object");
  switch (task) {
    case TaskKind::kMathDeterministicFilter:
      RejectUnknownKeys(j, {"deterministic"});
      return {{"deterministic", RequireBool(j, "deterministic")}};
    case TaskKind::kMathCorrectness:
      RejectUnknownKeys(j, {"model_a_correct", "model_b_correct", "model_a_reason", "model_b_reason"});
      return {{"model_a_correct", RequireBool(j, "model_a_correct")},
              {"model_b_correct", RequireBool(j, "model_b_correct")}};
    case TaskKind::kStyleTagging: {
      static const std::set<std::string> kSides = {"model_a", "model_b", "Both", "None"};
      json out = json::object();
      for (const auto& [key, value] : j.items()) {
        if (std::find(vocabulary.begin(), vocabulary.end(), key) == vocabulary.end()) {
          throw ProviderError("out-of-vocabulary trait '" + key + "'");
        }
        if (!value.is_string() || !kSides.contains(value.get<std::string>())) {
          throw ProviderError("trait '" + key + "' must be model_a, model_b, Both or None");
        }
        out[key] = value;
      }
      for (const auto& t : vocabulary) {
        if (!out.contains(t)) throw ProviderError("missing trait '" + t + "'");
      }
      return out;
    }
    case TaskKind::kPluralismLabel: {
      RejectUnknownKeys(j, {"politically_sensitive_prompt", "response_a_non_pluralistic",
                            "response_b_non_pluralistic", "response_a_refusal", "response_b_refusal"});
      json out = {{"politically_sensitive_prompt", RequireBool(j, "politically_sensitive_prompt")},
                  {"response_a_non_pluralistic", RequireBool(j, "response_a_non_pluralistic")},
                  {"response_b_non_pluralistic", RequireBool(j, "response_b_non_pluralistic")}};
      for (const char* k : {"response_a_refusal", "response_b_refusal"}) {
        if (j.contains(k)) out[k] = RequireBool(j, k);
      }
      return out;
    }
    case TaskKind::kPoliticsCategory: {
      RejectUnknownKeys(j, {"category"});
      auto it = j.find("category");
      if (it == j.end() || !it->is_string()) throw ProviderError("output field 'category' must be a string");
      const auto& names = PoliticsCategoryNames();
      if (std::find(names.begin(), names.end(), it->get<std::string>()) == names.end()) {
        throw ProviderError("unknown politics category '" + it->get<std::string>() + "'");
      }
      return {{"category", *it}};
    }
  }
  throw ProviderError("unknown task");
}

namespace {

// field -> value -> providers, over parsed outputs.
std::map<std::string, std::map<std::string, std::vector<std::string>>> FieldVotes(const LabelRow& row) {
  std::map<std::string, std::map<std::string, std::vector<std::string>>> votes;
  for (const auto& p : row.panel) {
    if (!p.parsed) continue;
    for (const auto& [field, value] : p.parsed->items()) votes[field][value.dump()].push_back(p.provider);
  }
  return votes;
}

}  // namespace

void ComputeMajority(LabelRow& row) {
  row.majority = json::object();
  row.dissent = json::object();
  const size_t voters = row.panel.size();
  for (const auto& [field, by_value] : FieldVotes(row)) {
    json winner = nullptr;
    for (const auto& [value, who] : by_value) {
      if (2 * who.size() > voters) winner = json::parse(value);
    }
    row.majority[field] = winner;
    json dissent = json::array();
    for (const auto& p : row.panel) {
      const bool agrees = p.parsed && p.parsed->contains(field) && !winner.is_null() &&
                          p.parsed->at(field) == winner;
      if (!agrees) dissent.push_back(p.provider);
    }
    row.dissent[field] = std::move(dissent);
  }
}

bool MajorityMatchesPanel(const LabelRow& row) {
  const auto votes = FieldVotes(row);
  if (votes.size() != row.majority.size()) return false;
  for (const auto& [field, by_value] : votes) {
    if (!row.majority.contains(field)) return false;
    // Mode: the most frequent value; unique mode holding > half the panel.
    size_t best = 0;
    size_t modes = 0;
    std::string mode;
    for (const auto& [value, who] : by_value) {
      if (who.size() > best) {
        best = who.size();
        mode = value;
        modes = 1;
      } else if (who.size() == best) {
        ++modes;
      }
    }
    const bool has_majority = modes == 1 && 2 * best > row.panel.size();
    const json& stored = row.majority.at(field);
    if (has_majority ? stored != json::parse(mode) : !stored.is_null()) return false;
  }
  return true;
}

JobSummary RunJob(const AnnotationJob& job, const Dataset& ds, const std::vector<Provider*>& panel) {
  ValidateJob(job);
  if (panel.size() != job.panel.size()) throw ValidationError("panel instances do not match the job");
  const std::string task_name(TaskName(job.task));

  // Resolve every target up front so bad ids fail before any spend.
  std::vector<TemplateVars> vars;
  vars.reserve(job.targets.size());
  for (const auto& t : job.targets) vars.push_back(ItemVars(job.task, ds, t));

  std::map<std::string, LabelRow> done;
  if (std::filesystem::exists(job.output)) {
    for (auto& row : LoadLabels(job.output)) {
      if (row.job_id != job.job_id || row.task != task_name) {
        throw ValidationError(job.output.string() + " belongs to job '" + row.job_id + "' (" + row.task +
                              "), not '" + job.job_id + "'");
      }
      // Later lines win; a completed row is never replaced by a failure.
      auto it = done.find(row.item_id);
      if (it == done.end() || it->second.failed) done[row.item_id] = std::move(row);
    }
  }

  JobSummary summary;
  summary.targets = job.targets.size();
  std::vector<size_t> todo;
  for (size_t i = 0; i < job.targets.size(); ++i) {
    auto it = done.find(job.targets[i]);
    if (it != done.end() && !it->second.failed) {
      ++summary.skipped;
    } else {
      todo.push_back(i);
    }
  }

  std::vector<size_t> calls_before;
  for (auto* p : panel) calls_before.push_back(p->call_count());

  const size_t budget = static_cast<size_t>(job.max_failure_fraction * double(job.targets.size()));
  std::mutex mu;
  std::atomic<size_t> failures{0};
  std::atomic<bool> abort{false};
  {
    std::ofstream append(job.output, std::ios::app);
    if (!append) throw IoError("cannot open " + job.output.string() + " for writing");
    ParallelFor(todo.size(), static_cast<size_t>(job.max_in_flight), [&](size_t k) {
      if (abort.load()) return;
      const size_t i = todo[k];
      LabelRow row;
      row.item_id = job.targets[i];
      row.task = task_name;
      row.job_id = job.job_id;
      row.template_id = job.effective_template();
      const std::string prompt = RenderTaskPrompt(row.template_id, vars[i]);
      row.prompt_sha256 = Sha256Hex(prompt);
      for (size_t p = 0; p < panel.size(); ++p) {
        PanelOutput out;
        out.provider = job.panel[p].name;
        try {
          out.raw = panel[p]->Complete(row.template_id, prompt, vars[i]);
          out.parsed = ParseTaskOutput(job.task, out.raw, job.vocabulary);
        } catch (const Error& e) {
          out.error = e.what();
          row.failed = true;
        }
        row.panel.push_back(std::move(out));
      }
      ComputeMajority(row);
      if (row.failed && ++failures > budget) abort = true;
      std::lock_guard<std::mutex> lock(mu);
      WriteLine(append, row);
      done[row.item_id] = std::move(row);
    });
  }

  summary.failed = failures.load();
  summary.labeled = todo.size() - summary.failed;
  summary.aborted = abort.load();
  for (size_t p = 0; p < panel.size(); ++p) summary.provider_calls += panel[p]->call_count() - calls_before[p];

  std::vector<LabelRow> ordered;
  for (const auto& t : job.targets) {
    auto it = done.find(t);
    if (it != done.end()) ordered.push_back(it->second);
  }
  // Rows for items no longer targeted are kept after the targets.
  std::set<std::string> targeted(job.targets.begin(), job.targets.end());
  for (const auto& [id, row] : done) {
    if (!targeted.contains(id)) ordered.push_back(row);
  }
  WriteLabels(ordered, job.output);
  if (summary.aborted) {
    throw ProviderError("job '" + job.job_id + "' aborted: " + std::to_string(summary.failed) + " of " +
                        std::to_string(summary.targets) + " items failed (limit " +
                        std::to_string(budget) + ")");
  }
  return summary;
}

JobSummary RunJob(const AnnotationJob& job, const Dataset& ds) {
  ValidateJob(job);
  std::vector<std::unique_ptr<Provider>> owned;
  std::vector<Provider*> panel;
  for (const auto& cfg : job.panel) {
    owned.push_back(MakeProvider(cfg));
    panel.push_back(owned.back().get());
  }
  return RunJob(job, ds, panel);
}

}  // namespace slicerank
