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

#include <gtest/gtest.h>

#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "slicerank/error.h"
#include "test_util.h"

namespace slicerank {
namespace {

using nlohmann::json;
using testing::TempDir;

Dataset ResponsesDataset(int n) {
  std::vector<JudgmentRecord> records;
  const char* models[] = {"alpha", "beta", "gamma"};
  for (int i = 0; i < n; ++i) {
    auto r = testing::MakeRecord("j" + std::to_string(i), "p" + std::to_string(i),
                                 "What is " + std::to_string(i) + " plus " + std::to_string(i) + "?",
                                 models[i % 3], models[(i + 1) % 3],
                                 i % 4 == 3 ? Outcome::kTie : (i % 2 ? Outcome::kBWin : Outcome::kAWin));
    r.response_a = "It is " + std::to_string(2 * i) + ".";
    r.response_b = "Step 1: add the numbers.\nStep 2: " + std::to_string(i) + " + " + std::to_string(i) +
                   " = " + std::to_string(2 * i) + ". Let me know if you need more?";
    records.push_back(std::move(r));
  }
  return Dataset::FromRecords(std::move(records));
}

std::vector<std::string> Ids(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

ProviderConfig Stub(const std::string& name, uint64_t seed = 0) {
  ProviderConfig c;
  c.name = name;
  c.seed = seed;
  return c;
}

ProviderConfig Fixed(const std::string& name, const std::string& output) {
  ProviderConfig c = Stub(name);
  c.fixed_output = output;
  return c;
}

AnnotationJob Job(TaskKind task, std::vector<ProviderConfig> panel, std::vector<std::string> targets,
                  const std::filesystem::path& out) {
  AnnotationJob job;
  job.job_id = "job-1";
  job.task = task;
  job.panel = std::move(panel);
  job.targets = std::move(targets);
  job.output = out;
  return job;
}

std::string ReadFile(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Fails on chosen item prompts, otherwise defers to a stub.
class FlakyProvider : public Provider {
 public:
  FlakyProvider(std::string name, std::set<std::string> poisoned)
      : name_(std::move(name)), poisoned_(std::move(poisoned)), inner_(Stub(name_)) {}
  const std::string& name() const override { return name_; }
  std::string Complete(const std::string& id, const std::string& prompt, const TemplateVars& vars) override {
    CountCall();
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (poisoned_.contains(vars.at("prompt"))) throw ProviderError("simulated outage");
    }
    return inner_.Complete(id, prompt, vars);
  }
  EmbeddingMatrix Embed(const std::vector<std::string>&) override { throw ProviderError("no embeddings"); }
  void Heal() {
    std::lock_guard<std::mutex> lock(mu_);
    poisoned_.clear();
  }

 private:
  std::string name_;
  std::mutex mu_;
  std::set<std::string> poisoned_;
  StubProvider inner_;
};

TEST(AnnotationJob, IdenticalStubPanelIsUnanimous) {
  TempDir dir;
  const auto ds = ResponsesDataset(12);
  auto job = Job(TaskKind::kPluralismLabel, {Stub("s1"), Stub("s2"), Stub("s3")}, Ids("j", 12),
                 dir.path() / "labels.jsonl");
  const auto summary = RunJob(job, ds);
  EXPECT_EQ(summary.labeled, 12u);
  EXPECT_EQ(summary.failed, 0u);
  EXPECT_EQ(summary.provider_calls, 36u);
  const auto rows = LoadLabels(job.output);
  ASSERT_EQ(rows.size(), 12u);
  StubProvider reference(Stub("ref"));
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    EXPECT_EQ(row.item_id, job.targets[i]);
    EXPECT_TRUE(row.Unanimous());
    EXPECT_TRUE(MajorityMatchesPanel(row));
    ASSERT_EQ(row.panel.size(), 3u);
    EXPECT_EQ(row.majority, *row.panel[0].parsed);
    // Raw outputs are stored verbatim.
    const auto& rec = ds.records()[i];
    TemplateVars vars = {{"prompt", rec.prompt_text},
                         {"model_a_response", *rec.response_a},
                         {"model_b_response", *rec.response_b}};
    EXPECT_EQ(row.panel[1].raw, reference.Complete("pluralism_label", "", vars));
    EXPECT_EQ(row.prompt_sha256.size(), 64u);
  }
}

TEST(AnnotationJob, RerunIssuesNoProviderCalls) {
  TempDir dir;
  const auto ds = ResponsesDataset(10);
  auto job = Job(TaskKind::kMathCorrectness, {Stub("a", 1), Stub("b", 2)}, Ids("j", 10),
                 dir.path() / "labels.jsonl");
  RunJob(job, ds);
  const auto first = ReadFile(job.output);
  StubProvider a(job.panel[0]);
  StubProvider b(job.panel[1]);
  const auto again = RunJob(job, ds, {&a, &b});
  EXPECT_EQ(again.skipped, 10u);
  EXPECT_EQ(again.provider_calls, 0u);
  EXPECT_EQ(a.call_count() + b.call_count(), 0u);
  EXPECT_EQ(ReadFile(job.output), first);
}

TEST(AnnotationJob, ResumesPartialFile) {
  TempDir dir;
  const auto ds = ResponsesDataset(10);
  auto partial = Job(TaskKind::kStyleTagging, {Stub("a")}, Ids("j", 4), dir.path() / "labels.jsonl");
  RunJob(partial, ds);
  auto full = partial;
  full.targets = Ids("j", 10);
  StubProvider a(full.panel[0]);
  const auto summary = RunJob(full, ds, {&a});
  EXPECT_EQ(summary.skipped, 4u);
  EXPECT_EQ(a.call_count(), 6u);

  TempDir fresh;
  auto direct = full;
  direct.output = fresh.path() / "labels.jsonl";
  RunJob(direct, ds);
  EXPECT_EQ(ReadFile(full.output), ReadFile(direct.output));
}

TEST(AnnotationJob, SplitPanelRecordsDissent) {
  TempDir dir;
  const auto ds = ResponsesDataset(3);
  const std::string yes =
      R"({"politically_sensitive_prompt": true, "response_a_non_pluralistic": true, "response_b_non_pluralistic": false})";
  const std::string no =
      R"({"politically_sensitive_prompt": false, "response_a_non_pluralistic": false, "response_b_non_pluralistic": false})";
  auto job = Job(TaskKind::kPluralismLabel, {Fixed("A1", yes), Fixed("A2", yes), Fixed("B", no)}, Ids("j", 3),
                 dir.path() / "labels.jsonl");
  RunJob(job, ds);
  for (const auto& row : LoadLabels(job.output)) {
    EXPECT_EQ(row.majority, json::parse(yes));
    EXPECT_FALSE(row.Unanimous());
    EXPECT_TRUE(MajorityMatchesPanel(row));
    EXPECT_EQ(row.dissent["politically_sensitive_prompt"], json({"B"}));
    EXPECT_EQ(row.dissent["response_a_non_pluralistic"], json({"B"}));
    EXPECT_EQ(row.dissent["response_b_non_pluralistic"], json::array());
  }
}

TEST(AnnotationJob, ThreeWaySplitHasNoMajority) {
  TempDir dir;
  const auto ds = ResponsesDataset(1);
  auto job = Job(TaskKind::kPoliticsCategory,
                 {Fixed("x", R"({"category":"human_rights_issues"})"),
                  Fixed("y", R"({"category":"future_predictions"})"),
                  Fixed("z", R"({"category":"geopolitical_conflicts"})")},
                 {"j0"}, dir.path() / "labels.jsonl");
  RunJob(job, ds);
  const auto rows = LoadLabels(job.output);
  EXPECT_TRUE(rows[0].majority["category"].is_null());
  EXPECT_TRUE(MajorityMatchesPanel(rows[0]));
  EXPECT_EQ(rows[0].dissent["category"].size(), 3u);
}

TEST(AnnotationJob, TamperedMajorityIsDetected) {
  TempDir dir;
  const auto ds = ResponsesDataset(4);
  auto job = Job(TaskKind::kPluralismLabel, {Stub("a"), Stub("b", 5), Stub("c", 9)}, Ids("j", 4),
                 dir.path() / "labels.jsonl");
  RunJob(job, ds);
  auto rows = LoadLabels(job.output);
  for (const auto& r : rows) EXPECT_TRUE(MajorityMatchesPanel(r));
  auto& field = rows[0].majority["politically_sensitive_prompt"];
  field = !field.get<bool>();
  EXPECT_FALSE(MajorityMatchesPanel(rows[0]));
}

TEST(AnnotationJob, FailedItemsKeptAndRetried) {
  TempDir dir;
  const auto ds = ResponsesDataset(20);
  auto job = Job(TaskKind::kMathCorrectness, {Stub("a"), Stub("b")}, Ids("j", 20), dir.path() / "labels.jsonl");
  FlakyProvider a("a", {ds.records()[7].prompt_text});
  StubProvider b(job.panel[1]);
  const auto summary = RunJob(job, ds, {&a, &b});
  EXPECT_EQ(summary.failed, 1u);
  EXPECT_EQ(summary.labeled, 19u);
  auto rows = LoadLabels(job.output);
  ASSERT_EQ(rows.size(), 20u);
  EXPECT_TRUE(rows[7].failed);
  EXPECT_EQ(rows[7].panel[0].error, "simulated outage");
  // The healthy panelist's spend is kept.
  EXPECT_FALSE(rows[7].panel[1].raw.empty());
  EXPECT_TRUE(rows[7].panel[1].parsed.has_value());

  a.Heal();
  const size_t before = a.call_count() + b.call_count();
  const auto retry = RunJob(job, ds, {&a, &b});
  EXPECT_EQ(retry.skipped, 19u);
  EXPECT_EQ(a.call_count() + b.call_count() - before, 2u);
  EXPECT_FALSE(LoadLabels(job.output)[7].failed);
}

TEST(AnnotationJob, AbortsPastFailureBudget) {
  TempDir dir;
  const auto ds = ResponsesDataset(20);
  auto job = Job(TaskKind::kStyleTagging, {Stub("a")}, Ids("j", 20), dir.path() / "labels.jsonl");
  job.max_in_flight = 1;
  FlakyProvider a("a", {ds.records()[2].prompt_text, ds.records()[5].prompt_text, ds.records()[9].prompt_text});
  try {
    RunJob(job, ds, {&a});
    FAIL() << "expected abort";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kProvider);
    EXPECT_NE(std::string(e.what()).find("aborted"), std::string::npos);
  }
  // Work done before the abort is on disk: items 0..9 (third failure at 9).
  const auto rows = LoadLabels(job.output);
  EXPECT_EQ(rows.size(), 10u);
  EXPECT_EQ(a.call_count(), 10u);
}

TEST(AnnotationJob, UnparseableOutputKeptVerbatim) {
  TempDir dir;
  const auto ds = ResponsesDataset(10);
  auto job = Job(TaskKind::kMathCorrectness, {Fixed("bad", "I think both are right."), Stub("good")}, {"j0"},
                 dir.path() / "labels.jsonl");
  job.max_failure_fraction = 1.0;
  RunJob(job, ds);
  const auto rows = LoadLabels(job.output);
  EXPECT_TRUE(rows[0].failed);
  EXPECT_EQ(rows[0].panel[0].raw, "I think both are right.");
  EXPECT_FALSE(rows[0].panel[0].parsed.has_value());
  EXPECT_FALSE(rows[0].panel[0].error.empty());
}

TEST(AnnotationJob, ConcurrencyDoesNotChangeOutput) {
  TempDir dir;
  const auto ds = ResponsesDataset(30);
  auto serial = Job(TaskKind::kPluralismLabel, {Stub("a"), Stub("b", 3), Stub("c", 4)}, Ids("j", 30),
                    dir.path() / "serial.jsonl");
  serial.max_in_flight = 1;
  auto parallel = serial;
  parallel.max_in_flight = 6;
  parallel.output = dir.path() / "parallel.jsonl";
  RunJob(serial, ds);
  RunJob(parallel, ds);
  EXPECT_EQ(ReadFile(serial.output), ReadFile(parallel.output));
}

TEST(AnnotationJob, PromptLevelTask) {
  TempDir dir;
  const auto ds = ResponsesDataset(5);
  auto job = Job(TaskKind::kMathDeterministicFilter, {Stub("a")}, Ids("p", 5), dir.path() / "f.jsonl");
  RunJob(job, ds);
  for (const auto& row : LoadLabels(job.output)) EXPECT_EQ(row.majority["deterministic"], true);
}

TEST(AnnotationJob, Validation) {
  TempDir dir;
  const auto ds = ResponsesDataset(5);
  const auto out = dir.path() / "x.jsonl";
  EXPECT_THROW(ValidateJob(Job(TaskKind::kPluralismLabel, {Stub("a"), Stub("b")}, {"j0"}, out)), Error);
  EXPECT_THROW(ValidateJob(Job(TaskKind::kPluralismLabel, {Stub("a"), Stub("b"), Stub("c"), Stub("d")}, {"j0"}, out)),
               Error);
  EXPECT_THROW(ValidateJob(Job(TaskKind::kMathCorrectness, {}, {"j0"}, out)), Error);
  EXPECT_THROW(ValidateJob(Job(TaskKind::kMathCorrectness, {Stub("a")}, {}, out)), Error);
  EXPECT_THROW(ValidateJob(Job(TaskKind::kMathCorrectness, {Stub("a")}, {"j0", "j0"}, out)), Error);
  auto mismatch = Job(TaskKind::kMathDeterministicFilter, {Stub("a")}, {"p0"}, out);
  mismatch.template_id = "math_correctness";
  try {
    ValidateJob(mismatch);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("model_a_response"), std::string::npos);
  }
  EXPECT_NO_THROW(ValidateJob(Job(TaskKind::kPluralismLabel, {Stub("a"), Stub("b"), Stub("c")}, {"j0"}, out)));

  // Unknown targets fail before any provider call.
  StubProvider a(Stub("a"));
  EXPECT_THROW(RunJob(Job(TaskKind::kStyleTagging, {Stub("a")}, {"j0", "missing"}, out), ds, {&a}), Error);
  EXPECT_EQ(a.call_count(), 0u);
  EXPECT_FALSE(std::filesystem::exists(out));

  auto no_text = Dataset::FromRecords({testing::MakeRecord("k", "q", "hi", "m1", "m2", Outcome::kAWin)});
  EXPECT_THROW(RunJob(Job(TaskKind::kStyleTagging, {Stub("a")}, {"k"}, out), no_text), Error);
}

TEST(AnnotationJob, RefusesOutputOfAnotherJob) {
  TempDir dir;
  const auto ds = ResponsesDataset(3);
  auto job = Job(TaskKind::kStyleTagging, {Stub("a")}, Ids("j", 3), dir.path() / "labels.jsonl");
  RunJob(job, ds);
  job.job_id = "job-2";
  EXPECT_THROW(RunJob(job, ds), Error);
}

TEST(AnnotationJob, FromJson) {
  auto job = AnnotationJobFromJson(json::parse(R"({
    "job_id": "pl", "task": "pluralism_label", "targets": ["j1"], "output": "out.jsonl",
    "panel": [{"kind": "offline-stub", "name": "a"}, {"kind": "offline-stub", "name": "b"},
              {"kind": "offline-stub", "name": "c"}]})"));
  EXPECT_EQ(job.task, TaskKind::kPluralismLabel);
  EXPECT_EQ(job.effective_template(), "pluralism_label");
  EXPECT_EQ(job.panel.size(), 3u);
  EXPECT_THROW(AnnotationJobFromJson(json::parse(R"({"job_id":"x","task":"nope","panel":[],"output":"o"})")),
               Error);
  EXPECT_THROW(AnnotationJobFromJson(json::parse(R"({"job_id":"x","task":"style_tagging","panel":[],"output":"o","x":1})")),
               Error);
}

TEST(ParseTaskOutput, StyleVocabularyIsClosed) {
  json tags = {{"conciseness", "model_a"},        {"elaboration", "model_b"},
               {"structure_richness", "Both"},    {"reasoning_with_derivation", "None"},
               {"rigorous_assumption_handling", "None"}, {"user_oriented_interaction", "model_b"}};
  EXPECT_EQ(ParseTaskOutput(TaskKind::kStyleTagging, "Here: " + tags.dump()), tags);
  auto extra = tags;
  extra["humor"] = "model_a";
  EXPECT_THROW(ParseTaskOutput(TaskKind::kStyleTagging, extra.dump()), Error);
  auto missing = tags;
  missing.erase("elaboration");
  EXPECT_THROW(ParseTaskOutput(TaskKind::kStyleTagging, missing.dump()), Error);
  auto bad = tags;
  bad["conciseness"] = "model_c";
  EXPECT_THROW(ParseTaskOutput(TaskKind::kStyleTagging, bad.dump()), Error);
  EXPECT_NO_THROW(ParseTaskOutput(TaskKind::kStyleTagging, R"({"brevity":"None"})", {"brevity"}));
}

TEST(ParseTaskOutput, OtherTasks) {
  EXPECT_THROW(ParseTaskOutput(TaskKind::kPoliticsCategory, R"({"category":"sports"})"), Error);
  EXPECT_THROW(ParseTaskOutput(TaskKind::kMathCorrectness, R"({"model_a_correct":"yes","model_b_correct":true})"),
               Error);
  EXPECT_EQ(ParseTaskOutput(TaskKind::kMathCorrectness,
                            R"({"model_a_correct":true,"model_a_reason":"ok","model_b_correct":false})"),
            json({{"model_a_correct", true}, {"model_b_correct", false}}));
  const auto p = ParseTaskOutput(
      TaskKind::kPluralismLabel,
      R"({"politically_sensitive_prompt":true,"response_a_non_pluralistic":false,"response_b_non_pluralistic":false,"response_b_refusal":true})");
  EXPECT_EQ(p["response_b_refusal"], true);
  EXPECT_THROW(ParseTaskOutput(TaskKind::kMathDeterministicFilter, "[true]"), Error);
}

TEST(TaskKind, NamesRoundTrip) {
  for (auto t : {TaskKind::kMathDeterministicFilter, TaskKind::kMathCorrectness, TaskKind::kStyleTagging,
                 TaskKind::kPluralismLabel, TaskKind::kPoliticsCategory}) {
    EXPECT_EQ(ParseTaskKind(TaskName(t)), t);
    EXPECT_NO_THROW(TemplateText(std::string(TaskName(t))));
  }
  EXPECT_FALSE(ParseTaskKind("nope").has_value());
}

}  // namespace
}  // namespace slicerank
