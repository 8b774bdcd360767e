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

#include "slicerank/annotation_analysis.h"

#include <gtest/gtest.h>

#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "slicerank/error.h"
#include "stats_oracles.h"
#include "test_util.h"

namespace slicerank {
namespace {

using nlohmann::json;
using testing::MakeRecord;
using testing::TempDir;

LabelRow Row(const std::string& item, const std::string& task, const std::vector<json>& outputs) {
  LabelRow row;
  row.item_id = item;
  row.task = task;
  for (size_t i = 0; i < outputs.size(); ++i) {
    PanelOutput out;
    out.provider = "p" + std::to_string(i);
    out.raw = outputs[i].dump();
    out.parsed.emplace(outputs[i]);
    row.panel.push_back(std::move(out));
  }
  ComputeMajority(row);
  return row;
}

json Correct(bool a, bool b) { return {{"model_a_correct", a}, {"model_b_correct", b}}; }

// ---------------------------------------------------------------------------

struct CorrectnessCase {
  std::string a_model, b_model;
  Outcome outcome;
  json p0, p1;
};

std::pair<Dataset, std::vector<LabelRow>> CorrectnessFixture(const std::vector<CorrectnessCase>& cases) {
  std::vector<JudgmentRecord> recs;
  std::vector<LabelRow> rows;
  for (size_t i = 0; i < cases.size(); ++i) {
    const auto id = "j" + std::to_string(i);
    recs.push_back(MakeRecord(id, "p" + std::to_string(i), "q", cases[i].a_model, cases[i].b_model, cases[i].outcome));
    rows.push_back(Row(id, "math_correctness", {cases[i].p0, cases[i].p1}));
  }
  return {Dataset::FromRecords(recs), rows};
}

TEST(CorrectnessPreference, TenItemHandTally) {
  const auto [ds, rows] = CorrectnessFixture({
      {"X", "Y", Outcome::kAWin, Correct(true, false), Correct(true, false)},     // split, picked correct
      {"X", "Z", Outcome::kBWin, Correct(true, false), Correct(true, false)},     // split, picked wrong
      {"Y", "Z", Outcome::kBWin, Correct(false, true), Correct(false, true)},     // split, picked correct
      {"X", "Y", Outcome::kTie, Correct(false, true), Correct(false, true)},      // split, undecided
      {"Y", "Z", Outcome::kAWin, Correct(true, true), Correct(true, true)},       // both, decided
      {"X", "Z", Outcome::kTie, Correct(true, true), Correct(true, true)},        // both
      {"X", "Y", Outcome::kBothBad, Correct(true, true), Correct(true, true)},    // both
      {"Z", "X", Outcome::kAWin, Correct(false, false), Correct(false, false)},   // neither
      {"X", "Y", Outcome::kAWin, Correct(true, false), Correct(true, true)},      // disagreement
      {"Y", "Z", Outcome::kBWin, Correct(false, true), Correct(true, true)},      // disagreement
  });
  const auto r = CorrectnessPreference(rows, ds);
  EXPECT_EQ(r.labeled_items, 10u);
  EXPECT_EQ(r.agreement_case_count, 8u);
  EXPECT_EQ(r.split_case_count, 4u);
  EXPECT_EQ(r.both_correct_count, 3u);
  EXPECT_EQ(r.both_incorrect_count, 1u);
  EXPECT_DOUBLE_EQ(r.split_case_share, 0.5);
  EXPECT_DOUBLE_EQ(r.both_correct_share, 0.375);
  EXPECT_DOUBLE_EQ(r.both_incorrect_share, 0.125);
  EXPECT_DOUBLE_EQ(r.split_case_share + r.both_correct_share + r.both_incorrect_share, 1.0);
  EXPECT_EQ(r.decided_split_cases, 3u);
  EXPECT_DOUBLE_EQ(*r.human_picked_correct_share, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(*r.decided_despite_both_correct_share, 1.0 / 3.0);
  // Hand tally over agreed cases: accuracy X 4/6, Y 3/5, Z 3/5; win rate X 1/3, Y 1/3, Z 3/4.
  const double want = oracle::SpearmanBruteForce({4.0 / 6, 3.0 / 5, 3.0 / 5}, {1.0 / 3, 1.0 / 3, 3.0 / 4});
  ASSERT_TRUE(r.correctness_preference_spearman.has_value());
  EXPECT_NEAR(*r.correctness_preference_spearman, want, 1e-12);
  EXPECT_EQ(r.spearman_models, 3u);
}

TEST(CorrectnessPreference, HumansAlwaysPickCorrect) {
  const auto [ds, rows] = CorrectnessFixture({
      {"X", "Y", Outcome::kAWin, Correct(true, false), Correct(true, false)},
      {"X", "Y", Outcome::kBWin, Correct(false, true), Correct(false, true)},
      {"Y", "X", Outcome::kAWin, Correct(true, false), Correct(true, false)},
  });
  EXPECT_DOUBLE_EQ(*CorrectnessPreference(rows, ds).human_picked_correct_share, 1.0);
}

TEST(CorrectnessPreference, Errors) {
  const auto [ds, rows] = CorrectnessFixture({
      {"X", "Y", Outcome::kAWin, Correct(true, false), Correct(false, false)},
  });
  EXPECT_THROW(CorrectnessPreference(rows, ds), Error);  // no agreed case
  auto single = Row("j0", "math_correctness", {Correct(true, false)});
  EXPECT_THROW(CorrectnessPreference({single}, ds), Error);
  auto unknown = Row("nope", "math_correctness", {Correct(true, false), Correct(true, false)});
  EXPECT_THROW(CorrectnessPreference({unknown}, ds), Error);
  auto wrong_task = Row("j0", "style_tagging", {Correct(true, false), Correct(true, false)});
  EXPECT_THROW(CorrectnessPreference({wrong_task}, ds), Error);
}

TEST(CorrectnessPreference, ByteIdenticalRerun) {
  const auto [ds, rows] = CorrectnessFixture({
      {"X", "Y", Outcome::kAWin, Correct(true, false), Correct(true, false)},
      {"Y", "Z", Outcome::kBWin, Correct(true, true), Correct(true, true)},
  });
  EXPECT_EQ(ToJson(CorrectnessPreference(rows, ds)).dump(), ToJson(CorrectnessPreference(rows, ds)).dump());
}

// ---------------------------------------------------------------------------

json Tags(const std::map<std::string, std::string>& set) {
  json j = json::object();
  for (const auto& t : DefaultStyleTraits()) {
    auto it = set.find(t);
    j[t] = it == set.end() ? "None" : it->second;
  }
  return j;
}

TEST(StyleOverlap, IdenticalTagsGiveOne) {
  std::vector<JudgmentRecord> recs;
  std::vector<LabelRow> rows;
  for (int i = 0; i < 4; ++i) {
    const auto id = "j" + std::to_string(i);
    recs.push_back(MakeRecord(id, "p" + std::to_string(i), "q", "A", "B", Outcome::kAWin));
    rows.push_back(Row(id, "style_tagging", {Tags({{"conciseness", "Both"}, {"elaboration", "Both"}})}));
  }
  const auto r = StyleOverlap(rows, Dataset::FromRecords(recs));
  EXPECT_DOUBLE_EQ(*r.mean_jaccard_decided_both_correct, 1.0);
  EXPECT_DOUBLE_EQ(*r.mean_jaccard_random_pairs, 1.0);
  EXPECT_EQ(r.restriction, "decided");
}

TEST(StyleOverlap, ThreePairDefinitionOracle) {
  const auto ds = Dataset::FromRecords({MakeRecord("j0", "p0", "q", "A", "B", Outcome::kAWin),
                                        MakeRecord("j1", "p1", "q", "A", "B", Outcome::kBWin),
                                        MakeRecord("j2", "p2", "q", "A", "B", Outcome::kAWin),
                                        MakeRecord("j3", "p3", "q", "A", "B", Outcome::kTie)});
  std::vector<LabelRow> rows = {
      // A {conciseness, structure}, B {elaboration, structure}: 1/3
      Row("j0", "style_tagging",
          {Tags({{"conciseness", "model_a"}, {"elaboration", "model_b"}, {"structure_richness", "Both"}})}),
      // A = B = {conciseness}: 1
      Row("j1", "style_tagging", {Tags({{"conciseness", "Both"}})}),
      // A {}, B {reasoning}: 0
      Row("j2", "style_tagging", {Tags({{"reasoning_with_derivation", "model_b"}})}),
      // Tie, excluded.
      Row("j3", "style_tagging", {Tags({{"conciseness", "model_a"}})}),
  };
  const auto r = StyleOverlap(rows, ds);
  EXPECT_EQ(r.analyzed_pairs, 3u);
  EXPECT_DOUBLE_EQ(*r.mean_jaccard_decided_both_correct, (1.0 / 3.0 + 1.0 + 0.0) / 3.0);
  // Winners: j0 A {conciseness, structure}, j1 B {conciseness}, j2 A {}.
  EXPECT_EQ(r.winners, 3u);
  EXPECT_EQ(r.winning_trait_frequencies.at("conciseness").count, 2u);
  EXPECT_DOUBLE_EQ(r.winning_trait_frequencies.at("conciseness").share, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.winning_trait_frequencies.at("structure_richness").share, 1.0 / 3.0);
  EXPECT_FALSE(r.winning_trait_frequencies.contains("elaboration"));
}

TEST(StyleOverlap, RandomBaselinePairsAcrossJudgmentsWithinCategory) {
  const auto ds = Dataset::FromRecords({MakeRecord("j0", "p0", "q", "A", "B", Outcome::kAWin),
                                        MakeRecord("j1", "p1", "q", "A", "B", Outcome::kAWin)});
  std::vector<LabelRow> rows = {Row("j0", "style_tagging", {Tags({{"conciseness", "Both"}})}),
                                Row("j1", "style_tagging", {Tags({{"elaboration", "Both"}})})};
  const auto r = StyleOverlap(rows, ds);
  EXPECT_EQ(r.random_pairs, 4u);
  EXPECT_DOUBLE_EQ(*r.mean_jaccard_random_pairs, 0.0);

  std::map<std::string, std::string> separate = {{"p0", "c0"}, {"p1", "c1"}};
  StyleOverlapOptions opts;
  opts.categories = &separate;
  const auto split = StyleOverlap(rows, ds, opts);
  EXPECT_EQ(split.random_pairs, 0u);
  EXPECT_FALSE(split.mean_jaccard_random_pairs.has_value());
  EXPECT_FALSE(split.notes.empty());
}

TEST(StyleOverlap, SeededBaselineIsDeterministic) {
  std::vector<JudgmentRecord> recs;
  std::vector<LabelRow> rows;
  std::mt19937 gen(3);
  const auto& traits = DefaultStyleTraits();
  const char* sides[] = {"model_a", "model_b", "Both", "None"};
  for (int i = 0; i < 40; ++i) {
    const auto id = "j" + std::to_string(i);
    recs.push_back(MakeRecord(id, "p" + std::to_string(i), "q", "A", "B", i % 2 ? Outcome::kAWin : Outcome::kBWin));
    std::map<std::string, std::string> t;
    for (const auto& name : traits) t[name] = sides[gen() % 4];
    rows.push_back(Row(id, "style_tagging", {Tags(t)}));
  }
  const auto ds = Dataset::FromRecords(recs);
  StyleOverlapOptions a;
  a.seed = 11;
  StyleOverlapOptions b;
  b.seed = 12;
  EXPECT_EQ(ToJson(StyleOverlap(rows, ds, a)).dump(), ToJson(StyleOverlap(rows, ds, a)).dump());
  EXPECT_NE(*StyleOverlap(rows, ds, a).mean_jaccard_random_pairs,
            *StyleOverlap(rows, ds, b).mean_jaccard_random_pairs);
}

TEST(StyleOverlap, CorrectnessRestriction) {
  const auto ds = Dataset::FromRecords({MakeRecord("j0", "p0", "q", "A", "B", Outcome::kAWin),
                                        MakeRecord("j1", "p1", "q", "A", "B", Outcome::kAWin)});
  std::vector<LabelRow> style = {Row("j0", "style_tagging", {Tags({{"conciseness", "Both"}})}),
                                 Row("j1", "style_tagging", {Tags({{"conciseness", "model_a"}})})};
  std::vector<LabelRow> correctness = {
      Row("j0", "math_correctness", {Correct(true, true), Correct(true, true)}),
      Row("j1", "math_correctness", {Correct(true, false), Correct(true, false)})};
  StyleOverlapOptions opts;
  opts.correctness = &correctness;
  const auto r = StyleOverlap(style, ds, opts);
  EXPECT_EQ(r.restriction, "decided_both_correct");
  EXPECT_EQ(r.analyzed_pairs, 1u);
  EXPECT_DOUBLE_EQ(*r.mean_jaccard_decided_both_correct, 1.0);
  EXPECT_THROW(StyleOverlap({}, ds), Error);
}

// ---------------------------------------------------------------------------

json Plural(bool sensitive, bool np_a, bool np_b) {
  return {{"politically_sensitive_prompt", sensitive},
          {"response_a_non_pluralistic", np_a},
          {"response_b_non_pluralistic", np_b}};
}

// `np_wins` of `cases` decided head-to-heads won by the non-pluralistic side,
// plus sensitive ties and non-sensitive judgments that must not count.
std::pair<Dataset, std::vector<LabelRow>> HeadToHeadFixture(int np_wins, int cases) {
  std::vector<JudgmentRecord> recs;
  std::vector<LabelRow> rows;
  int n = 0;
  auto add = [&](Outcome o, json label) {
    const auto id = "j" + std::to_string(n);
    recs.push_back(MakeRecord(id, "p" + std::to_string(n % 50), "prompt " + std::to_string(n % 50),
                              n % 3 ? "M1" : "M2", n % 3 ? "M3" : "M1", o));
    rows.push_back(Row(id, "pluralism_label", {label, label, label}));
    ++n;
  };
  for (int i = 0; i < cases; ++i) {
    const bool np_is_a = i % 2 == 0;
    const bool np_won = i < np_wins;
    add(np_won == np_is_a ? Outcome::kAWin : Outcome::kBWin, Plural(true, np_is_a, !np_is_a));
  }
  for (int i = 0; i < 7; ++i) add(Outcome::kTie, Plural(true, true, false));
  for (int i = 0; i < 5; ++i) add(Outcome::kAWin, Plural(true, true, true));
  for (int i = 0; i < 9; ++i) add(Outcome::kAWin, Plural(false, false, false));
  return {Dataset::FromRecords(recs), rows};
}

TEST(Pluralism, InferredSplitOf81) {
  const auto [ds, rows] = HeadToHeadFixture(44, 81);
  const auto r = Pluralism(rows, ds);
  ASSERT_TRUE(r.head_to_head.has_value());
  const auto& h = *r.head_to_head;
  EXPECT_EQ(h.cases, 81);
  EXPECT_EQ(h.non_pluralistic_wins, 44);
  EXPECT_EQ(h.pluralistic_wins + h.non_pluralistic_wins, h.cases);
  EXPECT_NEAR(h.non_pluralistic_share, 0.543, 0.001);
  EXPECT_NEAR(h.pluralistic_share, 0.457, 0.001);
  EXPECT_NEAR(h.binomial_p, oracle::BinomialHalfExact(44, 81), 1e-12);
  EXPECT_LT(h.interval.low, h.non_pluralistic_share);
  EXPECT_GT(h.interval.high, h.non_pluralistic_share);
  EXPECT_EQ(r.sensitive_judgment_count, 81u + 12u);
}

TEST(Pluralism, AnchorReportsDiscrepancyWithoutFailing) {
  const auto h = HeadToHeadFromCounts(44, 81);
  const auto anchor = HeadToHeadAnchor(h);
  EXPECT_DOUBLE_EQ(anchor["reference"]["reported_p"].get<double>(), 0.25);
  EXPECT_NEAR(anchor["reference"]["exact_p"].get<double>(), oracle::BinomialHalfExact(44, 81), 1e-12);
  EXPECT_TRUE(anchor.contains("note"));
}

TEST(Pluralism, PluralisticAlwaysWins) {
  const auto [ds, rows] = HeadToHeadFixture(0, 10);
  const auto h = *Pluralism(rows, ds).head_to_head;
  EXPECT_DOUBLE_EQ(h.pluralistic_share, 1.0);
  EXPECT_DOUBLE_EQ(h.non_pluralistic_share, 0.0);
}

TEST(Pluralism, NoQualifyingCasesOmitsHeadToHead) {
  const auto ds = Dataset::FromRecords({MakeRecord("j0", "p0", "q", "A", "B", Outcome::kAWin)});
  const auto r = Pluralism({Row("j0", "pluralism_label", {Plural(false, false, false)})}, ds);
  EXPECT_FALSE(r.head_to_head.has_value());
  EXPECT_FALSE(r.notes.empty());
  EXPECT_EQ(ToJson(r)["head_to_head"], nullptr);
}

TEST(Pluralism, SharesRatesAndRankDrop) {
  // Overall: A beats B and C, B beats C. On sensitive prompts C beats A.
  std::vector<JudgmentRecord> recs;
  std::vector<LabelRow> rows;
  int n = 0;
  auto add = [&](const std::string& a, const std::string& b, Outcome o, std::optional<json> label) {
    const auto id = "j" + std::to_string(n++);
    recs.push_back(MakeRecord(id, id, "text " + id, a, b, o));
    if (label) rows.push_back(Row(id, "pluralism_label", {*label, *label, *label}));
  };
  for (int i = 0; i < 6; ++i) add("A", "B", Outcome::kAWin, std::nullopt);
  for (int i = 0; i < 6; ++i) add("A", "C", Outcome::kAWin, std::nullopt);
  for (int i = 0; i < 6; ++i) add("B", "C", Outcome::kAWin, std::nullopt);
  json refused = Plural(true, true, false);
  refused["response_a_refusal"] = true;
  refused["response_b_refusal"] = false;
  add("A", "C", Outcome::kBWin, refused);
  add("A", "C", Outcome::kBWin, Plural(true, true, false));
  add("B", "C", Outcome::kAWin, Plural(true, false, false));
  const auto ds = Dataset::FromRecords(recs);
  const auto r = Pluralism(rows, ds, 0.0);
  EXPECT_EQ(r.sensitive_judgment_count, 3u);
  EXPECT_DOUBLE_EQ(r.non_pluralistic_share, 2.0 / 6.0);
  EXPECT_DOUBLE_EQ(*r.refusal_share, 0.5);
  EXPECT_DOUBLE_EQ(r.per_model_non_pluralistic_rates.at("A"), 1.0);
  EXPECT_DOUBLE_EQ(r.per_model_non_pluralistic_rates.at("C"), 0.0);
  // Sensitive raw rates: A 0/2, B 1/1, C 2/3. Overall: A 12/14, B 7/13, C 2/15.
  EXPECT_EQ(r.rank_drop_per_model.at("A").overall_rank, 1);
  EXPECT_EQ(r.rank_drop_per_model.at("A").sensitive_rank, 3);
  EXPECT_EQ(r.rank_drop_per_model.at("A").rank_drop, 2);
  EXPECT_EQ(r.rank_drop_per_model.at("C").rank_drop, -1);
  EXPECT_EQ(r.rank_drop_per_model.at("B").rank_drop, -1);
  EXPECT_EQ(r.head_to_head->cases, 2);
  EXPECT_EQ(r.head_to_head->pluralistic_wins, 2);
}

// ---------------------------------------------------------------------------

TEST(AgreementAudit, PerfectAgreement) {
  std::vector<HumanLabel> humans;
  std::vector<LabelRow> machines;
  for (int i = 0; i < 6; ++i) {
    const bool v = i % 2 == 0;
    const auto id = "j" + std::to_string(i);
    for (const char* rater : {"h1", "h2", "h3"}) humans.push_back({id, rater, {{"flag", v}}});
    machines.push_back(Row(id, "pluralism_label", {{{"flag", v}}, {{"flag", v}}, {{"flag", v}}}));
  }
  const auto r = AgreementAudit(humans, machines, "flag");
  EXPECT_EQ(r.shared_items, 6u);
  EXPECT_DOUBLE_EQ(*r.krippendorff_alpha_human_vs_machine, 1.0);
  EXPECT_DOUBLE_EQ(*r.alpha_machines_only, 1.0);
  EXPECT_DOUBLE_EQ(*r.alpha_humans_only, 1.0);
}

TEST(AgreementAudit, MatchesPairwiseOracle) {
  std::mt19937 gen(17);
  std::vector<HumanLabel> humans;
  std::vector<LabelRow> machines;
  std::vector<stats::RatingUnit> want_h, want_m, want_x;
  for (int i = 0; i < 20; ++i) {
    const auto id = "item" + std::to_string(i);
    const bool truth = gen() % 2;
    std::map<bool, int> tally;
    for (const char* rater : {"h1", "h2", "h3"}) {
      const bool v = gen() % 5 == 0 ? !truth : truth;
      humans.push_back({id, rater, {{"flag", v}}});
      want_h.push_back({id, rater, json(v).dump()});
      tally[v]++;
    }
    std::vector<json> outs;
    std::map<bool, int> mt;
    for (int p = 0; p < 3; ++p) {
      const bool v = gen() % 4 == 0 ? !truth : truth;
      outs.push_back({{"flag", v}});
      want_m.push_back({id, "p" + std::to_string(p), json(v).dump()});
      mt[v]++;
    }
    machines.push_back(Row(id, "pluralism_label", outs));
    want_x.push_back({id, "human", json(tally[true] >= 2).dump()});
    want_x.push_back({id, "machine", json(mt[true] >= 2).dump()});
  }
  // Items without a human label are outside the overlap.
  machines.push_back(Row("extra", "pluralism_label", {{{"flag", true}}, {{"flag", false}}, {{"flag", true}}}));
  const auto r = AgreementAudit(humans, machines, "flag");
  EXPECT_EQ(r.shared_items, 20u);
  EXPECT_NEAR(*r.alpha_humans_only, oracle::KrippendorffPairwise(want_h), 1e-9);
  EXPECT_NEAR(*r.alpha_machines_only, oracle::KrippendorffPairwise(want_m), 1e-9);
  EXPECT_NEAR(*r.krippendorff_alpha_human_vs_machine, oracle::KrippendorffPairwise(want_x), 1e-9);
}

TEST(AgreementAudit, EmptyOverlapAndFileLoading) {
  std::vector<HumanLabel> humans = {{"a", "h1", {{"flag", true}}}};
  std::vector<LabelRow> machines = {Row("b", "pluralism_label", {{{"flag", true}}})};
  EXPECT_THROW(AgreementAudit(humans, machines, "flag"), Error);
  EXPECT_THROW(AgreementAudit({{"a", "h1", {{"flag", true}}}, {"a", "h1", {{"flag", false}}}}, machines, "flag"),
               Error);

  TempDir dir;
  const auto path = dir.path() / "humans.jsonl";
  std::ofstream(path) << R"({"item_id":"a","rater":"h1","labels":{"flag":true}})" << "\n\n"
                      << R"({"item_id":"a","rater":"h2","labels":{"flag":false}})" << "\n";
  const auto loaded = LoadHumanLabels(path);
  ASSERT_EQ(loaded.size(), 2u);
  EXPECT_EQ(loaded[1].rater, "h2");
  std::ofstream(path) << R"({"item_id":"a"})" << "\n";
  EXPECT_THROW(LoadHumanLabels(path), Error);
}

// ---------------------------------------------------------------------------

std::vector<TraitSample> Samples(int n) {
  std::vector<TraitSample> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({"prompt " + std::to_string(i), "answer a" + std::to_string(i), "answer b" + std::to_string(i)});
  }
  return out;
}

// Returns scripted outputs in call order.
class ScriptedProvider : public Provider {
 public:
  explicit ScriptedProvider(std::vector<std::string> outputs) : outputs_(std::move(outputs)) {}
  const std::string& name() const override { return name_; }
  std::string Complete(const std::string&, const std::string&, const TemplateVars&) override {
    CountCall();
    const auto& o = outputs_.at(next_++ % outputs_.size());
    if (o == "FAIL") throw ProviderError("scripted failure");
    return o;
  }
  EmbeddingMatrix Embed(const std::vector<std::string>&) override { throw ProviderError("none"); }

 private:
  std::string name_ = "scripted";
  std::vector<std::string> outputs_;
  size_t next_ = 0;
};

TEST(DiscoverTraits, FixedListEveryRound) {
  ProviderConfig cfg;
  StubProvider stub(cfg);
  const auto r = DiscoverTraits(Samples(30), stub, {5, 10, 1});
  ASSERT_EQ(r.vocabulary.size(), DefaultStyleTraits().size());
  std::set<std::string> names;
  for (const auto& t : r.vocabulary) {
    EXPECT_EQ(t.count, 5);
    names.insert(t.trait);
  }
  EXPECT_EQ(names, std::set<std::string>(DefaultStyleTraits().begin(), DefaultStyleTraits().end()));
  EXPECT_FALSE(r.confirmed);
}

TEST(DiscoverTraits, OverlappingRoundsMerge) {
  ScriptedProvider p({R"(["Conciseness", "Use of Tables"])", R"({"traits": ["use-of-tables", {"name": "Humor"}]})"});
  const auto r = DiscoverTraits(Samples(5), p, {2, 3, 0});
  ASSERT_EQ(r.vocabulary.size(), 3u);
  EXPECT_EQ(r.vocabulary[0].trait, "use_of_tables");
  EXPECT_EQ(r.vocabulary[0].count, 2);
  EXPECT_EQ(r.vocabulary[1].trait, "conciseness");
  EXPECT_EQ(r.vocabulary[1].count, 1);
  EXPECT_EQ(r.vocabulary[2].trait, "humor");
}

TEST(DiscoverTraits, SeededSamplingIsReproducible) {
  ProviderConfig cfg;
  StubProvider s1(cfg);
  StubProvider s2(cfg);
  const auto a = DiscoverTraits(Samples(50), s1, {4, 8, 7});
  const auto b = DiscoverTraits(Samples(50), s2, {4, 8, 7});
  EXPECT_EQ(ToJson(a).dump(), ToJson(b).dump());
  std::set<size_t> distinct(a.rounds[0].sample_indices.begin(), a.rounds[0].sample_indices.end());
  EXPECT_EQ(distinct.size(), 8u);
  EXPECT_NE(a.rounds[0].sample_indices, a.rounds[1].sample_indices);
  StubProvider s3(cfg);
  EXPECT_NE(ToJson(DiscoverTraits(Samples(50), s3, {4, 8, 8})).dump(), ToJson(a).dump());
}

TEST(DiscoverTraits, Failures) {
  ScriptedProvider some({"FAIL", R"(["brevity"])"});
  const auto r = DiscoverTraits(Samples(5), some, {2, 2, 0});
  EXPECT_FALSE(r.rounds[0].error.empty());
  EXPECT_EQ(r.vocabulary.size(), 1u);
  ScriptedProvider none({"FAIL"});
  EXPECT_THROW(DiscoverTraits(Samples(5), none, {2, 2, 0}), Error);
  EXPECT_THROW(DiscoverTraits(Samples(1), none, {2, 2, 0}), Error);
}

TEST(DiscoverTraits, NormalizationAndConfirmation) {
  EXPECT_EQ(NormalizeTraitName("  Structure Richness! "), "structure_richness");
  EXPECT_EQ(NormalizeTraitName("user-oriented_interaction"), "user_oriented_interaction");
  EXPECT_EQ(NormalizeTraitName("!!"), "");

  TempDir dir;
  const auto path = dir.path() / "vocab.json";
  ProviderConfig cfg;
  StubProvider stub(cfg);
  auto r = DiscoverTraits(Samples(10), stub, {1, 2, 0});
  std::ofstream(path) << ToJson(r).dump();
  EXPECT_THROW(LoadConfirmedVocabulary(path), Error);
  r.confirmed = true;
  std::ofstream(path) << ToJson(r).dump();
  EXPECT_EQ(LoadConfirmedVocabulary(path).size(), 6u);
}

}  // namespace
}  // namespace slicerank
