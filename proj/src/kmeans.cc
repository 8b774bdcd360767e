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

#include "slicerank/kmeans.h"

#include <limits>

#include "slicerank/digest.h"
#include "slicerank/error.h"
#include "slicerank/parallel.h"

namespace slicerank {

namespace {

class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}
  double Uniform() { return UnitFromBits(SplitMix64(state_)); }
  size_t Index(size_t n) { return static_cast<size_t>(Uniform() * static_cast<double>(n)) % n; }

 private:
  uint64_t state_;
};

EmbeddingMatrix PlusPlusInit(const EmbeddingMatrix& x, int k, Rng& rng) {
  const size_t n = x.rows();
  EmbeddingMatrix centroids(static_cast<size_t>(k), x.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);
  size_t pick = rng.Index(n);
  for (int c = 0; c < k; ++c) {
    chosen[pick] = true;
    std::copy(x.row(pick).begin(), x.row(pick).end(), centroids.row(c).begin());
    if (c + 1 == k) break;
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(x.row(i), centroids.row(c)));
      total += d2[i];
    }
    if (total > 0.0) {
      double target = rng.Uniform() * total;
      pick = n;
      for (size_t i = 0; i < n; ++i) {
        if (d2[i] <= 0.0) continue;
        pick = i;
        target -= d2[i];
        if (target < 0.0) break;
      }
    } else {
      // All remaining points coincide with a centroid; take an unused row.
      size_t offset = rng.Index(n);
      pick = n;
      for (size_t step = 0; step < n; ++step) {
        size_t i = (offset + step) % n;
        if (!chosen[i]) {
          pick = i;
          break;
        }
      }
    }
  }
  return centroids;
}

// Nearest centroid; ties keep the current cluster when it is among the
// nearest, otherwise the lowest index wins.
int Nearest(std::span<const double> point, const EmbeddingMatrix& centroids, int current) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  double current_d = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < centroids.rows(); ++c) {
    const double d = SquaredDistance(point, centroids.row(c));
    if (static_cast<int>(c) == current) current_d = d;
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return (current >= 0 && current_d == best_d) ? current : best;
}

// Returns the number of changed assignments.
size_t Assign(const EmbeddingMatrix& x, const EmbeddingMatrix& centroids,
              std::vector<int>& assignment, int threads) {
  const size_t n = x.rows();
  std::vector<int> next(n);
  const size_t chunks = static_cast<size_t>(std::max(1, threads));
  const size_t chunk_size = (n + chunks - 1) / chunks;
  ParallelFor(chunks, chunks, [&](size_t chunk) {
    const size_t begin = chunk * chunk_size;
    const size_t end = std::min(n, begin + chunk_size);
    for (size_t i = begin; i < end; ++i) next[i] = Nearest(x.row(i), centroids, assignment[i]);
  });
  size_t changed = 0;
  for (size_t i = 0; i < n; ++i) {
    if (next[i] != assignment[i]) ++changed;
  }
  assignment.swap(next);
  return changed;
}

// Moves the farthest point (from its own centroid, among clusters with more
// than one member) into each empty cluster. Returns true if anything moved.
bool RepairEmpty(const EmbeddingMatrix& x, EmbeddingMatrix& centroids,
                 std::vector<int>& assignment) {
  const size_t k = centroids.rows();
  std::vector<size_t> sizes(k, 0);
  for (int a : assignment) ++sizes[static_cast<size_t>(a)];
  bool moved = false;
  for (size_t c = 0; c < k; ++c) {
    if (sizes[c] > 0) continue;
    size_t far = x.rows();
    double far_d = -1.0;
    for (size_t i = 0; i < x.rows(); ++i) {
      const auto own = static_cast<size_t>(assignment[i]);
      if (sizes[own] < 2) continue;
      const double d = SquaredDistance(x.row(i), centroids.row(own));
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == x.rows()) throw ValidationError("k-means: cannot fill empty cluster");
    --sizes[static_cast<size_t>(assignment[far])];
    assignment[far] = static_cast<int>(c);
    ++sizes[c];
    std::copy(x.row(far).begin(), x.row(far).end(), centroids.row(c).begin());
    moved = true;
  }
  return moved;
}

void UpdateCentroids(const EmbeddingMatrix& x, const std::vector<int>& assignment,
                     EmbeddingMatrix& centroids) {
  const size_t k = centroids.rows();
  EmbeddingMatrix sums(k, x.cols());
  std::vector<size_t> sizes(k, 0);
  for (size_t i = 0; i < x.rows(); ++i) {
    const auto c = static_cast<size_t>(assignment[i]);
    ++sizes[c];
    auto dst = sums.row(c);
    auto src = x.row(i);
    for (size_t d = 0; d < src.size(); ++d) dst[d] += src[d];
  }
  for (size_t c = 0; c < k; ++c) {
    if (sizes[c] == 0) continue;
    auto dst = centroids.row(c);
    auto src = sums.row(c);
    const double inv = 1.0 / static_cast<double>(sizes[c]);
    for (size_t d = 0; d < dst.size(); ++d) dst[d] = src[d] * inv;
  }
}

}  // namespace

double KMeansObjective(const EmbeddingMatrix& vectors, const std::vector<int>& assignment,
                       const EmbeddingMatrix& centroids) {
  double total = 0.0;
  for (size_t i = 0; i < vectors.rows(); ++i) {
    total += SquaredDistance(vectors.row(i), centroids.row(static_cast<size_t>(assignment[i])));
  }
  return total;
}

KMeansResult KMeans(const EmbeddingMatrix& vectors, const ClusteringConfig& config) {
  if (config.k <= 0) throw ValidationError("k-means: k must be positive");
  if (static_cast<size_t>(config.k) > vectors.rows()) {
    throw ValidationError("k-means: k = " + std::to_string(config.k) + " exceeds " +
                          std::to_string(vectors.rows()) + " items");
  }
  if (config.max_iterations < 1) throw ValidationError("k-means: max_iterations must be >= 1");

  Rng rng(config.seed);
  KMeansResult result;
  result.centroids = PlusPlusInit(vectors, config.k, rng);
  result.assignment.assign(vectors.rows(), -1);
  Assign(vectors, result.centroids, result.assignment, config.threads);
  RepairEmpty(vectors, result.centroids, result.assignment);

  for (int iter = 1; iter <= config.max_iterations; ++iter) {
    UpdateCentroids(vectors, result.assignment, result.centroids);
    result.objective_history.push_back(
        KMeansObjective(vectors, result.assignment, result.centroids));
    result.iterations = iter;
    size_t changed = Assign(vectors, result.centroids, result.assignment, config.threads);
    if (RepairEmpty(vectors, result.centroids, result.assignment)) ++changed;
    if (changed == 0) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged) {
    // Leave centroids consistent with the final assignment.
    UpdateCentroids(vectors, result.assignment, result.centroids);
  }
  return result;
}

}  // namespace slicerank
