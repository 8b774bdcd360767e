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

#include "slicerank/diagnostics.h"

#include <algorithm>
#include <cctype>
#include <map>

#include "slicerank/error.h"

namespace slicerank {

OutcomeShares ComputeOutcomeShares(const Dataset& dataset) {
  if (dataset.empty()) throw ValidationError("outcome shares of an empty dataset");
  size_t a = 0, b = 0, tie = 0;
  for (const auto& r : dataset.records()) {
    switch (r.outcome) {
      case Outcome::kAWin:
        ++a;
        break;
      case Outcome::kBWin:
        ++b;
        break;
      case Outcome::kTie:
      case Outcome::kBothBad:
        ++tie;
        break;
    }
  }
  const double n = static_cast<double>(dataset.size());
  return {static_cast<double>(a) / n, static_cast<double>(b) / n,
          static_cast<double>(tie) / n};
}

std::string NormalizePrompt(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (c < 0x80 && std::ispunct(c)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
  }
  return out;
}

std::set<std::string> DefaultGreetingLexicon() {
  return {"hi",          "hii",          "hiii",         "hello",
          "hello there", "hi there",     "hey",          "hey there",
          "heyy",        "yo",           "sup",          "whats up",
          "howdy",       "greetings",    "good morning", "good afternoon",
          "good evening", "hi how are you", "hello how are you",
          "how are you", "hola",         "bonjour",      "salut",
          "hallo",       "ciao",         "ola",          "olá",
          "привет",      "你好",         "こんにちは",   "안녕",
          "안녕하세요"};
}

CorpusDiagnostics ComputeCorpusDiagnostics(
    const Dataset& dataset, const std::set<std::string>& greeting_lexicon) {
  if (greeting_lexicon.empty()) throw ValidationError("empty greeting lexicon");
  CorpusDiagnostics diag;
  diag.outcome_shares = ComputeOutcomeShares(dataset);

  std::set<std::string> lexicon;
  for (const auto& word : greeting_lexicon) lexicon.insert(NormalizePrompt(word));

  struct Group {
    size_t count = 0;
    std::set<std::string> prompt_ids;
  };
  std::map<std::string, Group> groups;
  std::set<std::string> greeting_prompts;
  size_t greeting_decided = 0;
  for (const auto& r : dataset.records()) {
    std::string normalized = NormalizePrompt(r.prompt_text);
    if (lexicon.count(normalized)) {
      greeting_prompts.insert(r.prompt_id);
      ++diag.greeting_judgment_count;
      if (IsDecided(r.outcome)) ++greeting_decided;
    }
    Group& g = groups[std::move(normalized)];
    ++g.count;
    g.prompt_ids.insert(r.prompt_id);
  }
  diag.greeting_count = greeting_prompts.size();
  if (diag.greeting_judgment_count > 0) {
    diag.greeting_decided_share = static_cast<double>(greeting_decided) /
                                  static_cast<double>(diag.greeting_judgment_count);
  }
  for (auto& [text, g] : groups) {
    if (g.count < 2) continue;
    diag.duplicate_groups.push_back(
        {text, g.count, std::vector<std::string>(g.prompt_ids.begin(), g.prompt_ids.end())});
  }
  std::stable_sort(diag.duplicate_groups.begin(), diag.duplicate_groups.end(),
                   [](const DuplicateGroup& x, const DuplicateGroup& y) {
                     return x.count > y.count;
                   });
  return diag;
}

}  // namespace slicerank
