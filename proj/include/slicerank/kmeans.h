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

#ifndef SLICERANK_KMEANS_H_
#define SLICERANK_KMEANS_H_

#include <cstdint>
#include <vector>

#include "slicerank/embedding.h"

namespace slicerank {

struct ClusteringConfig {
  int k = 400;
  uint64_t seed = 0;
  int max_iterations = 100;
  // Worker threads for the assignment step. Results do not depend on it.
  int threads = 1;
};

struct KMeansResult {
  std::vector<int> assignment;  // row -> cluster in [0, k)
  EmbeddingMatrix centroids;
  int iterations = 0;
  bool converged = false;
  // Sum of squared distances to the assigned centroid after each update.
  std::vector<double> objective_history;
};

// Lloyd's algorithm with seeded k-means++ initialization. Every cluster ends
// non-empty: an emptied cluster is re-seeded with the point farthest from its
// own centroid. Deterministic for a given (vectors, seed, k). Throws
// ValidationError when k <= 0, k > rows, or max_iterations < 1.
KMeansResult KMeans(const EmbeddingMatrix& vectors, const ClusteringConfig& config);

// Sum of squared distances from each row to its assigned centroid.
double KMeansObjective(const EmbeddingMatrix& vectors, const std::vector<int>& assignment,
                       const EmbeddingMatrix& centroids);

}  // namespace slicerank

#endif  // SLICERANK_KMEANS_H_
