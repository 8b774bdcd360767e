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

#include "slicerank/providers.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "slicerank/digest.h"
#include "slicerank/error.h"

namespace slicerank {

using nlohmann::json;

void ProviderConfig::Validate() const {
  const std::string who = "provider '" + name + "'";
  if (name.empty()) throw ValidationError("provider name must be non-empty");
  if (retries < 0) throw ValidationError(who + ": retries must be >= 0");
  if (timeout.count() <= 0) throw ValidationError(who + ": timeout must be positive");
  if (max_in_flight < 1) throw ValidationError(who + ": max_in_flight must be >= 1");
  if (kind == ProviderKind::kOfflineStub) {
    if (!endpoint.empty() || !api_key_env.empty()) {
      throw ValidationError(who + ": offline stub takes no endpoint or credentials");
    }
    if (dimension < 1) throw ValidationError(who + ": dimension must be >= 1");
  } else {
    if (endpoint.empty()) throw ValidationError(who + ": remote provider needs an endpoint");
    if (model.empty()) throw ValidationError(who + ": remote provider needs a model");
    if (fixed_output) throw ValidationError(who + ": fixed_output is a stub-only field");
  }
}

ProviderConfig ProviderConfigFromJson(const json& j) {
  if (!j.is_object()) throw ValidationError("provider config must be an object");
  static const std::set<std::string> kKeys = {
      "kind",    "name",          "endpoint", "api_key_env", "model",      "timeout_ms",
      "retries", "max_in_flight", "seed",     "dimension",   "fixed_output"};
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.contains(key)) throw ValidationError("provider config: unknown key '" + key + "'");
  }
  ProviderConfig c;
  try {
    const std::string kind = j.value("kind", "offline-stub");
    if (kind == "offline-stub") {
      c.kind = ProviderKind::kOfflineStub;
    } else if (kind == "remote") {
      c.kind = ProviderKind::kRemote;
    } else {
      throw ValidationError("provider config: kind must be offline-stub or remote, got '" + kind + "'");
    }
    c.name = j.value("name", c.kind == ProviderKind::kRemote ? std::string("remote") : c.name);
    c.endpoint = j.value("endpoint", "");
    c.api_key_env = j.value("api_key_env", "");
    c.model = j.value("model", "");
    c.timeout = std::chrono::milliseconds(j.value("timeout_ms", int64_t{30000}));
    c.retries = j.value("retries", c.retries);
    c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
    c.seed = j.value("seed", uint64_t{0});
    c.dimension = j.value("dimension", c.dimension);
    if (j.contains("fixed_output")) c.fixed_output = j.at("fixed_output").get<std::string>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("provider config: ") + e.what());
  }
  c.Validate();
  return c;
}

json ProviderConfigToJson(const ProviderConfig& c) {
  json j = {{"kind", c.kind == ProviderKind::kRemote ? "remote" : "offline-stub"},
            {"name", c.name},
            {"timeout_ms", c.timeout.count()},
            {"retries", c.retries},
            {"max_in_flight", c.max_in_flight}};
  if (c.kind == ProviderKind::kRemote) {
    j["endpoint"] = c.endpoint;
    j["api_key_env"] = c.api_key_env;
    j["model"] = c.model;
  } else {
    j["seed"] = c.seed;
    j["dimension"] = c.dimension;
    if (c.fixed_output) j["fixed_output"] = *c.fixed_output;
  }
  return j;
}

ProvidersFile LoadProvidersFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read providers file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  ProvidersFile file;
  if (j.contains("label")) file.label = ProviderConfigFromJson(j["label"]);
  if (j.contains("embedding")) file.embedding = ProviderConfigFromJson(j["embedding"]);
  if (j.contains("panel")) {
    for (const auto& p : j["panel"]) file.panel.push_back(ProviderConfigFromJson(p));
  }
  return file;
}

std::unique_ptr<Provider> MakeProvider(const ProviderConfig& config) {
  config.Validate();
  if (config.kind == ProviderKind::kRemote) return MakeRemoteProvider(config);
  return std::make_unique<StubProvider>(config);
}

// ---------------------------------------------------------------------------
// Stub

namespace {

const std::set<std::string>& StopWords() {
  static const std::set<std::string> kWords = {
      "a",  "an", "and", "are", "as",   "at",  "be",   "by",   "for", "from", "how", "i",
      "in", "is", "it",  "me",  "my",   "of",  "on",   "or",   "the", "this", "to",  "what",
      "with", "you", "your", "can", "do", "does", "that", "about"};
  return kWords;
}

// Tokens ranked by count descending then alphabetically.
std::vector<std::string> RankTokens(const std::map<std::string, size_t>& counts, size_t limit) {
  std::vector<std::pair<std::string, size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> out;
  for (size_t i = 0; i < ranked.size() && out.size() < limit; ++i) out.push_back(ranked[i].first);
  return out;
}

std::vector<std::string> Lines(std::string_view text) {
  std::vector<std::string> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (line.rfind("- ", 0) == 0) line.erase(0, 2);
    if (!line.empty()) lines.push_back(std::move(line));
    start = end + 1;
  }
  return lines;
}

std::string Var(const TemplateVars& vars, const std::string& key) {
  auto it = vars.find(key);
  return it == vars.end() ? std::string() : it->second;
}

bool Coin(uint64_t seed, std::string_view salt, std::string_view text, double p = 0.5) {
  uint64_t state = Fnv1a64(text, Fnv1a64(salt, seed));
  return UnitFromBits(SplitMix64(state)) < p;
}

bool ContainsAny(std::string_view text, std::initializer_list<std::string_view> needles) {
  for (auto n : needles) {
    if (text.find(n) != std::string_view::npos) return true;
  }
  return false;
}

// "model_a" | "model_b" | "Both" | "None".
std::string Side(bool a, bool b) {
  if (a && b) return "Both";
  if (a) return "model_a";
  if (b) return "model_b";
  return "None";
}

std::string StubStyleTags(const std::string& ra, const std::string& rb) {
  auto structured = [](const std::string& r) {
    return ContainsAny(r, {"\n#", "\n1.", "\n- ", "|", "```"}) || r.rfind('#', 0) == 0;
  };
  auto derives = [](const std::string& r) { return ContainsAny(r, {"=", "step", "Step"}); };
  auto rigorous = [](const std::string& r) {
    return ContainsAny(r, {"assum", "Assum", "provided that", "edge case", "check", "Check"});
  };
  auto interactive = [](const std::string& r) {
    return ContainsAny(r, {"let me know", "Let me know", "?", "Would you", "would you"});
  };
  const bool a_shorter = ra.size() < rb.size();
  const bool b_shorter = rb.size() < ra.size();
  json j = {{"conciseness", Side(a_shorter, b_shorter)},
            {"elaboration", Side(b_shorter, a_shorter)},
            {"structure_richness", Side(structured(ra), structured(rb))},
            {"reasoning_with_derivation", Side(derives(ra), derives(rb))},
            {"rigorous_assumption_handling", Side(rigorous(ra), rigorous(rb))},
            {"user_oriented_interaction", Side(interactive(ra), interactive(rb))}};
  return j.dump();
}

const std::vector<std::string>& PoliticsCategories() {
  static const std::vector<std::string> kCategories = {
      "issues_related_to_china",    "human_rights_issues",
      "geopolitics_history_explanation", "geopolitical_conflicts",
      "normative_value_judgments",  "future_predictions"};
  return kCategories;
}

// One TOP; about sqrt(n) MIDs over contiguous, balanced runs of clusters.
std::string StubGrouping(size_t n) {
  const size_t mids = std::max<size_t>(1, static_cast<size_t>(std::lround(std::sqrt(double(n)))));
  json mid_list = json::array();
  size_t next = 1;
  for (size_t m = 0; m < mids; ++m) {
    const size_t size = n / mids + (m < n % mids ? 1 : 0);
    json clusters = json::array();
    for (size_t i = 0; i < size; ++i) clusters.push_back(next++);
    mid_list.push_back({{"label", "group-" + std::to_string(m)}, {"clusters", clusters}});
  }
  json j = {{"top", json::array({{{"label", "all-topics"}, {"mids", mid_list}}})}};
  return j.dump();
}

}  // namespace

StubProvider::StubProvider(ProviderConfig config) : config_(std::move(config)) {
  config_.Validate();
}

std::string StubProvider::TokenDigest(std::string_view text, size_t max_tokens) {
  std::map<std::string, size_t> counts;
  std::map<std::string, size_t> fallback;
  for (auto& t : Tokenize(text)) {
    (StopWords().contains(t) ? fallback : counts)[t]++;
  }
  if (counts.empty()) counts = std::move(fallback);
  if (counts.empty()) throw ProviderError("stub: prompt has no content to describe");
  std::string out;
  for (const auto& t : RankTokens(counts, max_tokens)) {
    if (!out.empty()) out += ' ';
    out += t;
  }
  return out;
}

std::string StubProvider::Complete(const std::string& template_id, const std::string& prompt,
                                   const TemplateVars& vars) {
  CountCall();
  if (config_.fixed_output) return *config_.fixed_output;
  const uint64_t seed = config_.seed;
  if (template_id == "topic_description") return TokenDigest(Var(vars, "prompt"));
  if (template_id == "cluster_label") {
    const auto in = Lines(Var(vars, "in_example_list"));
    if (in.empty()) throw ProviderError("stub: cluster has no IN examples");
    // Document frequency across IN examples.
    std::map<std::string, size_t> df;
    for (const auto& line : in) {
      auto tokens = Tokenize(line);
      std::set<std::string> unique(tokens.begin(), tokens.end());
      for (const auto& t : unique) {
        if (!StopWords().contains(t)) df[t]++;
      }
    }
    const auto keywords = RankTokens(df, 5);
    std::string description = "Prompts about";
    for (const auto& k : keywords) description += " " + k;
    description += ".";
    json j = {{"label", "cluster-" + Var(vars, "cluster_index")},
              {"description", description},
              {"keywords", keywords}};
    return j.dump();
  }
  if (template_id == "higher_level_grouping") {
    return StubGrouping(Lines(Var(vars, "child_cluster_list")).size());
  }
  if (template_id == "style_discovery") {
    return json({"conciseness", "elaboration", "structure_richness", "reasoning_with_derivation",
                 "rigorous_assumption_handling", "user_oriented_interaction"})
        .dump();
  }
  if (template_id == "math_deterministic_filter") {
    const std::string p = Var(vars, "prompt");
    const bool numeric = std::any_of(p.begin(), p.end(), [](char c) { return c >= '0' && c <= '9'; });
    return json({{"deterministic", numeric}}).dump();
  }
  if (template_id == "math_correctness") {
    return json({{"model_a_correct", Coin(seed, "correct", Var(vars, "model_a_response"), 0.7)},
                 {"model_b_correct", Coin(seed, "correct", Var(vars, "model_b_response"), 0.7)}})
        .dump();
  }
  if (template_id == "style_tagging") {
    return StubStyleTags(Var(vars, "model_a_response"), Var(vars, "model_b_response"));
  }
  if (template_id == "pluralism_label") {
    const std::string p = Var(vars, "prompt");
    const bool sensitive = Coin(seed, "sensitive", p);
    return json({{"politically_sensitive_prompt", sensitive},
                 {"response_a_non_pluralistic",
                  sensitive && Coin(seed, "np", Var(vars, "model_a_response"), 0.3)},
                 {"response_b_non_pluralistic",
                  sensitive && Coin(seed, "np", Var(vars, "model_b_response"), 0.3)}})
        .dump();
  }
  if (template_id == "politics_category") {
    uint64_t state = Fnv1a64(Var(vars, "prompt"), seed);
    const auto& cats = PoliticsCategories();
    return json({{"category", cats[SplitMix64(state) % cats.size()]}}).dump();
  }
  if (template_id == "win_rationale") {
    return json({{"winning_reasons", {"stub"}}, {"losing_reasons", {"stub"}}}).dump();
  }
  return TokenDigest(prompt);
}

EmbeddingMatrix StubProvider::Embed(const std::vector<std::string>& texts) {
  CountCall();
  const auto dim = static_cast<size_t>(config_.dimension);
  EmbeddingMatrix out(texts.size(), dim);
  for (size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) throw ProviderError("stub embedding: empty text at index " + std::to_string(i));
    std::map<std::string, size_t> counts;
    for (auto& t : Tokenize(texts[i])) counts[t]++;
    if (counts.empty()) counts[texts[i]] = 1;
    auto row = out.row(i);
    for (const auto& [token, count] : counts) {
      // Column d of the projection for this token is a fixed Gaussian draw.
      uint64_t state = Fnv1a64(token, config_.seed);
      for (size_t d = 0; d < dim; d += 2) {
        const double u1 = UnitFromBits(SplitMix64(state));
        const double u2 = UnitFromBits(SplitMix64(state));
        const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
        row[d] += static_cast<double>(count) * r * std::cos(2.0 * M_PI * u2);
        if (d + 1 < dim) row[d + 1] += static_cast<double>(count) * r * std::sin(2.0 * M_PI * u2);
      }
    }
    if (!NormalizeInPlace(row)) throw ProviderError("stub embedding: degenerate vector");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prompt rendering and response parsing

std::string RenderTaskPrompt(const std::string& template_id, const TemplateVars& vars) {
  static const std::map<std::string, std::string> kFormat = {
      {"cluster_label",
       R"(Respond with a JSON object: {"label": string, "description": string, "keywords": [string]}.)"},
      {"higher_level_grouping",
       R"(Respond with a JSON object: {"top": [{"label": string, "mids": [{"label": string, "clusters": [cluster numbers]}]}]}.)"},
      {"math_deterministic_filter", R"(Respond with a JSON object: {"deterministic": true | false}.)"},
      {"math_correctness",
       R"(Respond with a JSON object: {"model_a_correct": true | false, "model_b_correct": true | false}.)"},
      {"style_discovery", R"(Respond with a JSON array of trait names in snake_case.)"},
      {"politics_category", R"(Respond with a JSON object: {"category": "<category name>"}.)"},
      {"win_rationale",
       R"(Respond with a JSON object: {"winning_reasons": [string], "losing_reasons": [string]}.)"},
  };
  std::string out = RenderTemplate(TemplateText(template_id), vars);
  auto it = kFormat.find(template_id);
  if (it != kFormat.end()) {
    if (!out.empty() && out.back() != '\n') out += '\n';
    out += "\n" + it->second + "\n";
  }
  return out;
}

json ExtractJson(std::string_view text) {
  for (size_t start = 0; start < text.size(); ++start) {
    const char open = text[start];
    if (open != '{' && open != '[') continue;
    int depth = 0;
    bool in_string = false;
    bool escape = false;
    for (size_t i = start; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (escape) {
          escape = false;
        } else if (c == '\\') {
          escape = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{' || c == '[') {
        ++depth;
      } else if (c == '}' || c == ']') {
        if (--depth == 0) {
          json j = json::parse(text.substr(start, i - start + 1), nullptr, false);
          if (!j.is_discarded()) return j;
          break;
        }
      }
    }
  }
  throw ProviderError("no JSON value in provider output");
}

}  // namespace slicerank
