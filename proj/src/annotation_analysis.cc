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

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "slicerank/digest.h"
#include "slicerank/error.h"

namespace slicerank {

using json = nlohmann::json;

namespace {

json Opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

const JudgmentRecord& Judgment(const Dataset& ds, const std::string& id) {
  auto idx = ds.FindJudgment(id);
  if (!idx) throw ValidationError("label item '" + id + "' is not a judgment in the dataset");
  return ds.records()[*idx];
}

void RequireTask(const LabelRow& row, std::string_view task) {
  if (row.task != task) {
    throw ValidationError("label item '" + row.item_id + "' is a " + row.task + " row, expected " +
                          std::string(task));
  }
}

// Majority value of a boolean field, nullopt when missing or undecided.
std::optional<bool> MajorityBool(const LabelRow& row, const std::string& field) {
  auto it = row.majority.find(field);
  if (it == row.majority.end() || !it->is_boolean()) return std::nullopt;
  return it->get<bool>();
}

bool AllFieldsDecided(const LabelRow& row) {
  if (row.failed || row.majority.empty()) return false;
  for (const auto& [k, v] : row.majority.items()) {
    if (v.is_null()) return false;
  }
  return true;
}

// 1-based competition ranks by value descending.
std::map<std::string, int> MinRanks(const std::map<std::string, double>& values) {
  std::map<std::string, int> out;
  for (const auto& [m, v] : values) {
    int better = 0;
    for (const auto& [o, w] : values) better += w > v ? 1 : 0;
    out[m] = better + 1;
  }
  return out;
}

double Share(size_t num, size_t den) { return den == 0 ? 0.0 : double(num) / double(den); }

}  // namespace

// ---------------------------------------------------------------------------
// Correctness vs preference

CorrectnessReport CorrectnessPreference(const std::vector<LabelRow>& labels, const Dataset& ds) {
  CorrectnessReport r;
  struct ModelTally {
    int64_t responses = 0;
    int64_t correct = 0;
    stats::WinLoss wl;
  };
  std::map<std::string, ModelTally> models;
  size_t decided_both_correct = 0;
  size_t picked_correct = 0;
  for (const auto& row : labels) {
    RequireTask(row, "math_correctness");
    if (row.panel.size() < 2) {
      throw ValidationError("label item '" + row.item_id + "' has " + std::to_string(row.panel.size()) +
                            " provider(s); correctness analysis needs at least 2");
    }
    const auto& rec = Judgment(ds, row.item_id);
    ++r.labeled_items;
    if (!row.Unanimous()) continue;
    const auto a = MajorityBool(row, "model_a_correct");
    const auto b = MajorityBool(row, "model_b_correct");
    if (!a || !b) continue;
    ++r.agreement_case_count;
    const bool decided = IsDecided(rec.outcome);
    if (*a != *b) {
      ++r.split_case_count;
      if (decided) {
        ++r.decided_split_cases;
        const bool a_won = rec.outcome == Outcome::kAWin;
        if (a_won == *a) ++picked_correct;
      }
    } else if (*a) {
      ++r.both_correct_count;
      if (decided) ++decided_both_correct;
    } else {
      ++r.both_incorrect_count;
    }
    auto& ma = models[rec.model_a.name];
    auto& mb = models[rec.model_b.name];
    ma.responses++;
    mb.responses++;
    ma.correct += *a ? 1 : 0;
    mb.correct += *b ? 1 : 0;
    if (rec.outcome == Outcome::kAWin) {
      ma.wl.wins++;
      mb.wl.losses++;
    } else if (rec.outcome == Outcome::kBWin) {
      mb.wl.wins++;
      ma.wl.losses++;
    }
  }
  if (r.agreement_case_count == 0) throw ValidationError("no agreed correctness cases");
  const size_t n = r.agreement_case_count;
  r.split_case_share = Share(r.split_case_count, n);
  r.both_correct_share = Share(r.both_correct_count, n);
  r.both_incorrect_share = Share(r.both_incorrect_count, n);
  if (r.decided_split_cases > 0) {
    r.human_picked_correct_share = Share(picked_correct, r.decided_split_cases);
  } else {
    r.notes.push_back("no decided split cases");
  }
  if (r.both_correct_count > 0) {
    r.decided_despite_both_correct_share = Share(decided_both_correct, r.both_correct_count);
  }
  std::vector<double> accuracy;
  std::vector<double> preference;
  for (const auto& [m, t] : models) {
    if (t.responses == 0 || t.wl.decided() == 0) continue;
    accuracy.push_back(double(t.correct) / double(t.responses));
    preference.push_back(stats::WinRate(t.wl));
  }
  r.spearman_models = accuracy.size();
  try {
    r.correctness_preference_spearman = stats::Spearman(accuracy, preference);
  } catch (const Error& e) {
    r.notes.push_back(std::string("spearman undefined: ") + e.what());
  }
  return r;
}

json ToJson(const CorrectnessReport& r) {
  return {{"labeled_items", r.labeled_items},
          {"agreement_case_count", r.agreement_case_count},
          {"split_case_count", r.split_case_count},
          {"both_correct_count", r.both_correct_count},
          {"both_incorrect_count", r.both_incorrect_count},
          {"split_case_share", r.split_case_share},
          {"both_correct_share", r.both_correct_share},
          {"both_incorrect_share", r.both_incorrect_share},
          {"decided_split_cases", r.decided_split_cases},
          {"human_picked_correct_share", Opt(r.human_picked_correct_share)},
          {"decided_despite_both_correct_share", Opt(r.decided_despite_both_correct_share)},
          {"correctness_preference_spearman", Opt(r.correctness_preference_spearman)},
          {"spearman_models", r.spearman_models},
          {"notes", r.notes}};
}

// ---------------------------------------------------------------------------
// Style overlap

std::pair<std::set<std::string>, std::set<std::string>> ResponseTraits(const LabelRow& row) {
  std::set<std::string> a;
  std::set<std::string> b;
  for (const auto& [trait, side] : row.majority.items()) {
    if (!side.is_string()) continue;
    const auto s = side.get<std::string>();
    if (s == "model_a" || s == "Both") a.insert(trait);
    if (s == "model_b" || s == "Both") b.insert(trait);
  }
  return {a, b};
}

StyleOverlapReport StyleOverlap(const std::vector<LabelRow>& labels, const Dataset& ds,
                                const StyleOverlapOptions& options) {
  if (labels.empty()) throw ValidationError("no style labels");
  StyleOverlapReport r;
  r.restriction = options.correctness ? "decided_both_correct" : "decided";
  std::set<std::string> both_correct;
  if (options.correctness) {
    for (const auto& row : *options.correctness) {
      RequireTask(row, "math_correctness");
      if (row.Unanimous() && MajorityBool(row, "model_a_correct").value_or(false) &&
          MajorityBool(row, "model_b_correct").value_or(false)) {
        both_correct.insert(row.item_id);
      }
    }
  }
  struct Response {
    size_t judgment;
    std::string category;
    std::set<std::string> traits;
  };
  std::vector<Response> responses;
  double jaccard_sum = 0.0;
  size_t skipped = 0;
  std::map<std::string, size_t> trait_wins;
  for (size_t i = 0; i < labels.size(); ++i) {
    const auto& row = labels[i];
    RequireTask(row, "style_tagging");
    const auto& rec = Judgment(ds, row.item_id);
    if (!AllFieldsDecided(row)) {
      ++skipped;
      continue;
    }
    if (!IsDecided(rec.outcome)) continue;
    if (options.correctness && !both_correct.contains(row.item_id)) continue;
    auto [a, b] = ResponseTraits(row);
    ++r.analyzed_pairs;
    jaccard_sum += stats::Jaccard(a, b);
    ++r.winners;
    for (const auto& t : rec.outcome == Outcome::kAWin ? a : b) trait_wins[t]++;
    std::string category;
    if (options.categories) {
      auto it = options.categories->find(rec.prompt_id);
      if (it != options.categories->end()) category = it->second;
    }
    responses.push_back({i, category, std::move(a)});
    responses.push_back({i, category, std::move(b)});
  }
  if (skipped > 0) r.notes.push_back(std::to_string(skipped) + " items without a majority on every trait skipped");
  if (r.analyzed_pairs == 0) {
    r.notes.push_back("no qualifying judgments");
    return r;
  }
  r.mean_jaccard_decided_both_correct = jaccard_sum / double(r.analyzed_pairs);
  for (const auto& [t, c] : trait_wins) r.winning_trait_frequencies[t] = {c, Share(c, r.winners)};

  std::map<std::string, std::vector<size_t>> by_category;
  for (size_t k = 0; k < responses.size(); ++k) by_category[responses[k].category].push_back(k);
  uint64_t state = options.seed;
  double random_sum = 0.0;
  for (size_t k = 0; k < responses.size(); ++k) {
    const auto& group = by_category[responses[k].category];
    const bool has_other = std::any_of(group.begin(), group.end(), [&](size_t o) {
      return responses[o].judgment != responses[k].judgment;
    });
    if (!has_other) continue;
    size_t pick;
    do {
      pick = group[SplitMix64(state) % group.size()];
    } while (responses[pick].judgment == responses[k].judgment);
    random_sum += stats::Jaccard(responses[k].traits, responses[pick].traits);
    ++r.random_pairs;
  }
  if (r.random_pairs > 0) {
    r.mean_jaccard_random_pairs = random_sum / double(r.random_pairs);
  } else {
    r.notes.push_back("random baseline needs two judgments in a category");
  }
  return r;
}

json ToJson(const StyleOverlapReport& r) {
  json freq = json::object();
  for (const auto& [t, f] : r.winning_trait_frequencies) freq[t] = {{"count", f.count}, {"share", f.share}};
  return {{"restriction", r.restriction},
          {"analyzed_pairs", r.analyzed_pairs},
          {"mean_jaccard_decided_both_correct", Opt(r.mean_jaccard_decided_both_correct)},
          {"random_pairs", r.random_pairs},
          {"mean_jaccard_random_pairs", Opt(r.mean_jaccard_random_pairs)},
          {"winners", r.winners},
          {"winning_trait_frequencies", freq},
          {"notes", r.notes}};
}

// ---------------------------------------------------------------------------
// Pluralism

HeadToHead HeadToHeadFromCounts(int64_t non_pluralistic_wins, int64_t cases) {
  if (cases <= 0 || non_pluralistic_wins < 0 || non_pluralistic_wins > cases) {
    throw ValidationError("head-to-head needs 0 <= wins <= cases and cases > 0");
  }
  HeadToHead h;
  h.cases = cases;
  h.non_pluralistic_wins = non_pluralistic_wins;
  h.pluralistic_wins = cases - non_pluralistic_wins;
  h.non_pluralistic_share = double(h.non_pluralistic_wins) / double(cases);
  h.pluralistic_share = double(h.pluralistic_wins) / double(cases);
  h.binomial_p = stats::BinomialTest(non_pluralistic_wins, cases, 0.5);
  h.interval = stats::WilsonInterval({non_pluralistic_wins, h.pluralistic_wins, 0});
  return h;
}

json ToJson(const HeadToHead& h) {
  return {{"pluralistic_wins", h.pluralistic_wins},
          {"non_pluralistic_wins", h.non_pluralistic_wins},
          {"cases", h.cases},
          {"pluralistic_share", h.pluralistic_share},
          {"non_pluralistic_share", h.non_pluralistic_share},
          {"binomial_p", h.binomial_p},
          {"interval", {{"low", h.interval.low}, {"high", h.interval.high}, {"level", h.interval.level}}}};
}

json HeadToHeadAnchor(const HeadToHead& observed) {
  constexpr int64_t kReferenceWins = 44;
  constexpr int64_t kReferenceCases = 81;
  constexpr double kReferenceP = 0.25;
  const auto reference = HeadToHeadFromCounts(kReferenceWins, kReferenceCases);
  json j = {{"reference", {{"non_pluralistic_wins", kReferenceWins},
                           {"cases", kReferenceCases},
                           {"reported_p", kReferenceP},
                           {"exact_p", reference.binomial_p}}},
            {"observed", ToJson(observed)},
            {"p_discrepancy_vs_reported", observed.binomial_p - kReferenceP}};
  if (std::abs(reference.binomial_p - kReferenceP) > 1e-3) {
    j["note"] = "exact two-sided binomial p for 44/81 is " + json(reference.binomial_p).dump() +
                ", not the reported 0.25; the reported value is kept as an anchor only";
  }
  return j;
}

PluralismReport Pluralism(const std::vector<LabelRow>& labels, const Dataset& ds, double prior_strength) {
  if (!(prior_strength >= 0.0)) throw ValidationError("prior strength must be >= 0");
  PluralismReport r;
  size_t responses = 0;
  size_t non_pluralistic = 0;
  size_t refusal_responses = 0;
  size_t refusals = 0;
  size_t skipped = 0;
  int64_t np_wins = 0;
  int64_t cases = 0;
  std::set<std::string> sensitive_prompts;
  std::map<std::string, std::pair<size_t, size_t>> per_model;  // flagged, responses
  std::map<std::string, stats::WinLoss> sensitive_wl;
  for (const auto& row : labels) {
    RequireTask(row, "pluralism_label");
    const auto& rec = Judgment(ds, row.item_id);
    ++r.labeled_items;
    const auto sensitive = MajorityBool(row, "politically_sensitive_prompt");
    const auto np_a = MajorityBool(row, "response_a_non_pluralistic");
    const auto np_b = MajorityBool(row, "response_b_non_pluralistic");
    if (row.failed || !sensitive || !np_a || !np_b) {
      ++skipped;
      continue;
    }
    if (!*sensitive) continue;
    ++r.sensitive_judgment_count;
    sensitive_prompts.insert(rec.prompt_id);
    responses += 2;
    non_pluralistic += (*np_a ? 1 : 0) + (*np_b ? 1 : 0);
    per_model[rec.model_a.name].first += *np_a ? 1 : 0;
    per_model[rec.model_a.name].second++;
    per_model[rec.model_b.name].first += *np_b ? 1 : 0;
    per_model[rec.model_b.name].second++;
    for (const auto& [field, flag] : {std::pair{"response_a_refusal", 0}, std::pair{"response_b_refusal", 1}}) {
      if (auto v = MajorityBool(row, field)) {
        ++refusal_responses;
        refusals += *v ? 1 : 0;
      }
    }
    if (rec.outcome == Outcome::kAWin) {
      sensitive_wl[rec.model_a.name].wins++;
      sensitive_wl[rec.model_b.name].losses++;
    } else if (rec.outcome == Outcome::kBWin) {
      sensitive_wl[rec.model_b.name].wins++;
      sensitive_wl[rec.model_a.name].losses++;
    }
    if (IsDecided(rec.outcome) && *np_a != *np_b) {
      ++cases;
      const bool a_won = rec.outcome == Outcome::kAWin;
      if (a_won == *np_a) ++np_wins;
    }
  }
  if (skipped > 0) r.notes.push_back(std::to_string(skipped) + " items without a majority label skipped");
  r.sensitive_prompt_count = sensitive_prompts.size();
  r.non_pluralistic_share = Share(non_pluralistic, responses);
  if (refusal_responses > 0) r.refusal_share = Share(refusals, refusal_responses);
  if (cases > 0) {
    r.head_to_head = HeadToHeadFromCounts(np_wins, cases);
  } else {
    r.notes.push_back("no decided sensitive judgments with exactly one non-pluralistic response; head-to-head omitted");
  }
  for (const auto& [m, c] : per_model) r.per_model_non_pluralistic_rates[m] = Share(c.first, c.second);

  std::map<std::string, stats::WinLoss> overall_wl;
  for (const auto& rec : ds.records()) {
    if (rec.outcome == Outcome::kAWin) {
      overall_wl[rec.model_a.name].wins++;
      overall_wl[rec.model_b.name].losses++;
    } else if (rec.outcome == Outcome::kBWin) {
      overall_wl[rec.model_b.name].wins++;
      overall_wl[rec.model_a.name].losses++;
    }
  }
  std::map<std::string, double> overall_rate;
  std::map<std::string, double> sensitive_rate;
  for (const auto& [m, wl] : sensitive_wl) {
    if (wl.decided() == 0) continue;
    const auto& all = overall_wl[m];
    const double raw_overall = stats::WinRate(all);
    if (prior_strength > 0.0) {
      const stats::SmoothingConfig cfg{std::clamp(raw_overall, 1e-3, 1.0 - 1e-3), prior_strength};
      sensitive_rate[m] = stats::SmoothedWinRate(wl, cfg);
    } else {
      sensitive_rate[m] = stats::WinRate(wl);
    }
    overall_rate[m] = raw_overall;
  }
  const auto overall_ranks = MinRanks(overall_rate);
  const auto sensitive_ranks = MinRanks(sensitive_rate);
  for (const auto& [m, rate] : sensitive_rate) {
    RankShift s;
    s.overall_rank = overall_ranks.at(m);
    s.sensitive_rank = sensitive_ranks.at(m);
    s.rank_drop = s.sensitive_rank - s.overall_rank;
    s.overall_rate = overall_rate.at(m);
    s.sensitive_rate = rate;
    r.rank_drop_per_model[m] = s;
  }
  return r;
}

json ToJson(const PluralismReport& r) {
  json rates = json::object();
  for (const auto& [m, v] : r.per_model_non_pluralistic_rates) rates[m] = v;
  json drops = json::object();
  for (const auto& [m, s] : r.rank_drop_per_model) {
    drops[m] = {{"overall_rank", s.overall_rank},
                {"sensitive_rank", s.sensitive_rank},
                {"rank_drop", s.rank_drop},
                {"overall_rate", s.overall_rate},
                {"sensitive_rate", s.sensitive_rate}};
  }
  return {{"labeled_items", r.labeled_items},
          {"sensitive_judgment_count", r.sensitive_judgment_count},
          {"sensitive_prompt_count", r.sensitive_prompt_count},
          {"non_pluralistic_share", r.non_pluralistic_share},
          {"refusal_share", Opt(r.refusal_share)},
          {"head_to_head", r.head_to_head ? ToJson(*r.head_to_head) : json(nullptr)},
          {"per_model_non_pluralistic_rates", rates},
          {"rank_drop_per_model", drops},
          {"notes", r.notes}};
}

// ---------------------------------------------------------------------------
// Agreement audit

std::vector<HumanLabel> LoadHumanLabels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open human label file " + path.string());
  std::vector<HumanLabel> out;
  std::string line;
  size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = json::parse(line);
      HumanLabel h{j.at("item_id").get<std::string>(), j.at("rater").get<std::string>(), j.at("labels")};
      if (!h.labels.is_object()) throw ValidationError("labels must be an object");
      out.push_back(std::move(h));
    } catch (const std::exception& e) {
      throw ValidationError(path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return out;
}

AgreementAuditReport AgreementAudit(const std::vector<HumanLabel>& humans, const std::vector<LabelRow>& machines,
                                    const std::string& field) {
  AgreementAuditReport r;
  r.field = field;
  std::map<std::string, std::map<std::string, std::string>> human_by_item;
  for (const auto& h : humans) {
    auto it = h.labels.find(field);
    if (it == h.labels.end() || it->is_null()) continue;
    if (!human_by_item[h.item_id].emplace(h.rater, it->dump()).second) {
      throw ValidationError("human rater '" + h.rater + "' labels item '" + h.item_id + "' twice");
    }
  }
  std::map<std::string, const LabelRow*> machine_by_item;
  for (const auto& row : machines) machine_by_item[row.item_id] = &row;

  std::vector<stats::RatingUnit> cross;
  std::vector<stats::RatingUnit> machine_units;
  std::vector<stats::RatingUnit> human_units;
  size_t no_human_majority = 0;
  for (const auto& [item, raters] : human_by_item) {
    auto m = machine_by_item.find(item);
    if (m == machine_by_item.end()) continue;
    std::vector<stats::RatingUnit> mine;
    for (const auto& p : m->second->panel) {
      if (p.parsed && p.parsed->contains(field)) mine.push_back({item, p.provider, p.parsed->at(field).dump()});
    }
    if (mine.empty()) continue;
    ++r.shared_items;
    machine_units.insert(machine_units.end(), mine.begin(), mine.end());
    std::map<std::string, size_t> tally;
    for (const auto& [rater, label] : raters) {
      human_units.push_back({item, rater, label});
      tally[label]++;
    }
    std::optional<std::string> human_majority;
    for (const auto& [label, c] : tally) {
      if (2 * c > raters.size()) human_majority = label;
    }
    auto maj = m->second->majority.find(field);
    if (!human_majority) {
      ++no_human_majority;
    } else if (maj != m->second->majority.end() && !maj->is_null()) {
      cross.push_back({item, "human", *human_majority});
      cross.push_back({item, "machine", maj->dump()});
    }
  }
  if (r.shared_items == 0) throw ValidationError("no items labeled '" + field + "' by both humans and machines");
  if (no_human_majority > 0) {
    r.notes.push_back(std::to_string(no_human_majority) + " items without a human majority left out of human_vs_machine");
  }
  auto alpha = [&](const std::vector<stats::RatingUnit>& units, const char* name) -> std::optional<double> {
    try {
      return stats::KrippendorffAlphaNominal(units);
    } catch (const Error& e) {
      r.notes.push_back(std::string(name) + ": " + e.what());
      return std::nullopt;
    }
  };
  r.krippendorff_alpha_human_vs_machine = alpha(cross, "human_vs_machine");
  r.alpha_machines_only = alpha(machine_units, "machines_only");
  r.alpha_humans_only = alpha(human_units, "humans_only");
  return r;
}

json ToJson(const AgreementAuditReport& r) {
  return {{"field", r.field},
          {"shared_items", r.shared_items},
          {"krippendorff_alpha_human_vs_machine", Opt(r.krippendorff_alpha_human_vs_machine)},
          {"alpha_machines_only", Opt(r.alpha_machines_only)},
          {"alpha_humans_only", Opt(r.alpha_humans_only)},
          {"notes", r.notes}};
}

// ---------------------------------------------------------------------------
// Trait discovery

std::vector<TraitSample> SamplesFromDataset(const Dataset& ds) {
  std::vector<TraitSample> out;
  for (const auto& r : ds.records()) {
    if (r.response_a && r.response_b) out.push_back({r.prompt_text, *r.response_a, *r.response_b});
  }
  return out;
}

std::string NormalizeTraitName(std::string_view name) {
  std::string out;
  bool pending = false;
  for (unsigned char c : name) {
    if (std::isalnum(c)) {
      if (pending && !out.empty()) out += '_';
      pending = false;
      out += static_cast<char>(std::tolower(c));
    } else {
      pending = true;
    }
  }
  return out;
}

namespace {

std::vector<std::string> ParseTraitList(std::string_view raw) {
  json j = ExtractJson(raw);
  if (j.is_object() && j.contains("traits")) j = j.at("traits");
  if (!j.is_array()) throw ProviderError("trait discovery output must be a JSON array");
  std::vector<std::string> names;
  for (const auto& e : j) {
    if (e.is_string()) {
      names.push_back(e.get<std::string>());
    } else if (e.is_object() && e.contains("name") && e.at("name").is_string()) {
      names.push_back(e.at("name").get<std::string>());
    } else if (e.is_object() && e.contains("trait") && e.at("trait").is_string()) {
      names.push_back(e.at("trait").get<std::string>());
    } else {
      throw ProviderError("trait entry must be a string or an object with a name");
    }
  }
  std::set<std::string> unique;
  for (const auto& n : names) {
    auto norm = NormalizeTraitName(n);
    if (!norm.empty()) unique.insert(norm);
  }
  return {unique.begin(), unique.end()};
}

}  // namespace

DiscoveryResult DiscoverTraits(const std::vector<TraitSample>& samples, Provider& provider,
                               const DiscoveryConfig& config) {
  if (config.rounds < 1) throw ValidationError("rounds must be at least 1");
  if (config.sample_size < 1) throw ValidationError("sample_size must be at least 1");
  if (samples.size() < static_cast<size_t>(config.sample_size)) {
    throw ValidationError("trait discovery needs " + std::to_string(config.sample_size) + " samples, have " +
                          std::to_string(samples.size()));
  }
  DiscoveryResult result;
  std::map<std::string, int> counts;
  size_t failed = 0;
  for (int round = 0; round < config.rounds; ++round) {
    DiscoveryRound dr;
    dr.round = round;
    // Partial Fisher-Yates over sample indices.
    std::vector<size_t> idx(samples.size());
    for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    uint64_t state = Fnv1a64("round-" + std::to_string(round), config.seed);
    for (size_t i = 0; i < static_cast<size_t>(config.sample_size); ++i) {
      const size_t j = i + SplitMix64(state) % (idx.size() - i);
      std::swap(idx[i], idx[j]);
    }
    dr.sample_indices.assign(idx.begin(), idx.begin() + config.sample_size);
    std::string list;
    for (size_t k = 0; k < dr.sample_indices.size(); ++k) {
      const auto& s = samples[dr.sample_indices[k]];
      list += "Sample " + std::to_string(k + 1) + ":\nPrompt: " + s.prompt + "\nModel A's Response: " +
              s.response_a + "\nModel B's Response: " + s.response_b + "\n\n";
    }
    const TemplateVars vars = {{"sample_list", list}};
    const std::string prompt = RenderTaskPrompt("style_discovery", vars);
    dr.prompt_sha256 = Sha256Hex(prompt);
    try {
      dr.traits = ParseTraitList(provider.Complete("style_discovery", prompt, vars));
      for (const auto& t : dr.traits) counts[t]++;
    } catch (const Error& e) {
      dr.error = e.what();
      ++failed;
    }
    result.rounds.push_back(std::move(dr));
  }
  if (failed == static_cast<size_t>(config.rounds)) {
    throw ProviderError("trait discovery: every round failed (" + result.rounds.back().error + ")");
  }
  for (const auto& [t, c] : counts) result.vocabulary.push_back({t, c});
  std::stable_sort(result.vocabulary.begin(), result.vocabulary.end(),
                   [](const DiscoveredTrait& a, const DiscoveredTrait& b) { return a.count > b.count; });
  return result;
}

json ToJson(const DiscoveryResult& r) {
  json vocab = json::array();
  for (const auto& t : r.vocabulary) vocab.push_back({{"trait", t.trait}, {"count", t.count}});
  json rounds = json::array();
  for (const auto& d : r.rounds) {
    json o = {{"round", d.round},
              {"sample_indices", d.sample_indices},
              {"prompt_sha256", d.prompt_sha256},
              {"traits", d.traits}};
    if (!d.error.empty()) o["error"] = d.error;
    rounds.push_back(std::move(o));
  }
  return {{"confirmed", r.confirmed}, {"vocabulary", vocab}, {"rounds", rounds}};
}

std::vector<std::string> LoadConfirmedVocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open vocabulary file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.value("confirmed", false)) {
    throw ValidationError(path.string() + ": vocabulary is not confirmed; review it and set \"confirmed\": true");
  }
  std::vector<std::string> out;
  for (const auto& e : j.value("vocabulary", json::array())) {
    if (e.is_string()) {
      out.push_back(e.get<std::string>());
    } else if (e.is_object() && e.contains("trait")) {
      out.push_back(e.at("trait").get<std::string>());
    } else {
      throw ValidationError(path.string() + ": malformed vocabulary entry");
    }
  }
  if (out.empty()) throw ValidationError(path.string() + ": empty vocabulary");
  return out;
}

}  // namespace slicerank
