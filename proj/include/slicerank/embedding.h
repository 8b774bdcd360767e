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

#ifndef SLICERANK_EMBEDDING_H_
#define SLICERANK_EMBEDDING_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace slicerank {

// Dense row-major matrix of embedding vectors.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(size_t rows, size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  size_t rows() const { return rows_; }
  size_t cols() const { return cols_; }

  std::span<const double> row(size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<double> row(size_t i) { return {data_.data() + i * cols_, cols_}; }

  const std::vector<double>& data() const { return data_; }

  bool operator==(const EmbeddingMatrix&) const = default;

 private:
  size_t rows_ = 0;
  size_t cols_ = 0;
  std::vector<double> data_;
};

double SquaredDistance(std::span<const double> a, std::span<const double> b);

// Scales `v` to unit L2 norm. Returns false (leaving v untouched) for a zero
// vector.
bool NormalizeInPlace(std::span<double> v);

// Lowercased word tokens (NormalizePrompt then split on spaces).
std::vector<std::string> Tokenize(std::string_view text);

}  // namespace slicerank

#endif  // SLICERANK_EMBEDDING_H_
