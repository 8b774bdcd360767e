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

#ifndef SLICERANK_TESTS_TEST_UTIL_H_
#define SLICERANK_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <fstream>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "slicerank/dataset.h"

namespace slicerank::testing {

inline JudgmentRecord MakeRecord(std::string id, std::string prompt_id,
                                 std::string prompt, std::string a,
                                 std::string b, Outcome outcome,
                                 std::optional<std::string> timestamp = {}) {
  JudgmentRecord r;
  r.judgment_id = std::move(id);
  r.prompt_id = std::move(prompt_id);
  r.prompt_text = std::move(prompt);
  r.model_a.name = std::move(a);
  r.model_b.name = std::move(b);
  r.outcome = outcome;
  r.timestamp = std::move(timestamp);
  return r;
}

// Accumulates head-to-head results as records with unique ids and
// increasing timestamps. Each call adds games on prompt `prompt_id`.
class GameLog {
 public:
  void Add(const std::string& prompt_id, const std::string& a, const std::string& b,
           int a_wins, int b_wins, int ties = 0) {
    auto push = [&](Outcome o) {
      char ts[32];
      std::snprintf(ts, sizeof(ts), "2025-03-01T%02d:%02d:%02dZ", (n_ / 3600) % 24, (n_ / 60) % 60,
                    n_ % 60);
      records_.push_back(MakeRecord("g" + std::to_string(n_), prompt_id, "prompt " + prompt_id, a,
                                    b, o, std::string(ts)));
      ++n_;
    };
    for (int i = 0; i < a_wins; ++i) push(Outcome::kAWin);
    for (int i = 0; i < b_wins; ++i) push(Outcome::kBWin);
    for (int i = 0; i < ties; ++i) push(Outcome::kTie);
  }
  Dataset Build() const { return Dataset::FromRecords(records_); }

 private:
  std::vector<JudgmentRecord> records_;
  int n_ = 0;
};

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("slicerank_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

inline std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace slicerank::testing

#endif  // SLICERANK_TESTS_TEST_UTIL_H_
