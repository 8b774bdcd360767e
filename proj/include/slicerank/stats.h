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

#ifndef SLICERANK_STATS_H_
#define SLICERANK_STATS_H_

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace slicerank::stats {

struct WinLoss {
  int64_t wins = 0;
  int64_t losses = 0;
  int64_t ties = 0;

  // Decisions; ties are excluded from every rate.
  int64_t decided() const { return wins + losses; }
  int64_t total() const { return wins + losses + ties; }

  WinLoss& operator+=(const WinLoss& other) {
    wins += other.wins;
    losses += other.losses;
    ties += other.ties;
    return *this;
  }
  WinLoss& operator-=(const WinLoss& other) {
    wins -= other.wins;
    losses -= other.losses;
    ties -= other.ties;
    return *this;
  }
  friend WinLoss operator+(WinLoss a, const WinLoss& b) { return a += b; }
  friend WinLoss operator-(WinLoss a, const WinLoss& b) { return a -= b; }
  bool operator==(const WinLoss&) const = default;
};

// Beta(m*p0, m*(1-p0)) prior expressed as a mean and an equivalent sample size.
struct SmoothingConfig {
  double prior_mean = 0.5;
  double prior_strength = 10.0;
};

struct Interval {
  double low = 0.0;
  double high = 1.0;
  double level = 0.95;
};

// wins / (wins + losses). Throws ValidationError when there are no decisions.
double WinRate(const WinLoss& s);

// Posterior mean (wins + m*p0) / (wins + losses + m). Requires p0 in (0,1)
// and m > 0.
double SmoothedWinRate(const WinLoss& s, const SmoothingConfig& config);

// Wilson score interval for wins / (wins + losses).
Interval WilsonInterval(const WinLoss& s, double level = 0.95);

// Fractional ranks (1-based); tied values share the mean of their positions.
std::vector<double> AverageRanks(std::span<const double> values);

// Pearson correlation of average ranks. Throws ValidationError on length
// mismatch, fewer than two points, or a constant input.
double Spearman(std::span<const double> x, std::span<const double> y);

// Pooled two-proportion z statistic for w1/n1 - w2/n2. Returns nullopt when
// the pooled proportion is 0 or 1 (statistic undefined). Throws when n1 or
// n2 is not positive.
std::optional<double> TwoProportionZ(int64_t w1, int64_t n1, int64_t w2,
                                     int64_t n2);

// Exact two-sided binomial test: sum of P(X = i) over outcomes no more
// likely than the observed one.
double BinomialTest(int64_t k, int64_t n, double p0 = 0.5);

// |a ∩ b| / |a ∪ b|, with jaccard(∅, ∅) = 1.
double Jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

// Cohen's kappa from a square confusion matrix (rows: rater A). Returns
// nullopt when expected agreement is 1.
std::optional<double> CohenKappaFromConfusion(
    const std::vector<std::vector<int64_t>>& confusion);
std::optional<double> CohenKappa(std::span<const std::string> labels_a,
                                 std::span<const std::string> labels_b);

struct RatingUnit {
  std::string item;
  std::string rater;
  std::string label;
};

// Krippendorff's alpha, nominal metric, coincidence-matrix form. Items with a
// single label are not pairable and are ignored. Returns 1 when observed
// disagreement is zero. Throws ValidationError when no item carries two or
// more labels, or when an (item, rater) pair repeats.
double KrippendorffAlphaNominal(std::span<const RatingUnit> units);

// Strict-majority label of an odd-sized panel; nullopt when no label holds a
// strict majority. Throws ValidationError for an even or empty panel.
std::optional<std::string> MajorityVote(std::span<const std::string> labels);

}  // namespace slicerank::stats

#endif  // SLICERANK_STATS_H_
