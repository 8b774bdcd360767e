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

#ifndef SLICERANK_DIAGNOSTICS_H_
#define SLICERANK_DIAGNOSTICS_H_

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "slicerank/dataset.h"

namespace slicerank {

// Fractions over all records. TIE and BOTH_BAD are pooled into `tie`.
struct OutcomeShares {
  double a = 0.0;
  double b = 0.0;
  double tie = 0.0;
};

// Throws ValidationError on an empty dataset.
OutcomeShares ComputeOutcomeShares(const Dataset& dataset);

// Lowercases ASCII letters, drops ASCII punctuation and collapses runs of
// whitespace to one space (trimmed). Non-ASCII bytes pass through unchanged.
// Idempotent.
std::string NormalizePrompt(std::string_view text);

struct DuplicateGroup {
  std::string normalized_text;
  size_t count = 0;  // judgments carrying this normalized prompt, >= 2
  std::vector<std::string> prompt_ids;
};

struct CorpusDiagnostics {
  OutcomeShares outcome_shares;
  // Sorted by count descending, then text.
  std::vector<DuplicateGroup> duplicate_groups;
  // Distinct prompt ids whose normalized text is in the greeting lexicon.
  size_t greeting_count = 0;
  size_t greeting_judgment_count = 0;
  // Share of greeting judgments decided as A_WIN or B_WIN; 0 when none.
  double greeting_decided_share = 0.0;
};

// Small English/multilingual lexicon of greeting-only prompts.
std::set<std::string> DefaultGreetingLexicon();

// Duplicates are exact matches after NormalizePrompt; no fuzzy matching.
// Lexicon entries are normalized before comparison. Throws ValidationError
// for an empty lexicon or dataset.
CorpusDiagnostics ComputeCorpusDiagnostics(
    const Dataset& dataset, const std::set<std::string>& greeting_lexicon);

}  // namespace slicerank

#endif  // SLICERANK_DIAGNOSTICS_H_
