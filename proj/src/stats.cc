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

#include "slicerank/stats.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <utility>

#include <boost/math/distributions/normal.hpp>

#include "slicerank/error.h"

namespace slicerank::stats {

double WinRate(const WinLoss& s) {
  if (s.decided() <= 0) throw ValidationError("win rate with no decisions");
  return static_cast<double>(s.wins) / static_cast<double>(s.decided());
}

double SmoothedWinRate(const WinLoss& s, const SmoothingConfig& config) {
  if (!(config.prior_mean > 0.0 && config.prior_mean < 1.0)) {
    throw ValidationError("prior mean must lie in (0, 1)");
  }
  if (!(config.prior_strength > 0.0)) {
    throw ValidationError("prior strength must be positive");
  }
  if (s.decided() == 0) return config.prior_mean;
  return (static_cast<double>(s.wins) + config.prior_strength * config.prior_mean) /
         (static_cast<double>(s.decided()) + config.prior_strength);
}

Interval WilsonInterval(const WinLoss& s, double level) {
  if (s.decided() <= 0) throw ValidationError("interval with no decisions");
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("level must lie in (0, 1)");
  const boost::math::normal_distribution<double> normal;
  const double z = boost::math::quantile(normal, 1.0 - (1.0 - level) / 2.0);
  const double n = static_cast<double>(s.decided());
  const double p = static_cast<double>(s.wins) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  Interval out;
  out.level = level;
  out.low = s.wins == 0 ? 0.0 : std::clamp(center - half, 0.0, p);
  out.high = s.losses == 0 ? 1.0 : std::clamp(center + half, p, 1.0);
  return out;
}

std::vector<double> AverageRanks(std::span<const double> values) {
  std::vector<size_t> order(values.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i + 1;
    while (j < order.size() && values[order[j]] == values[order[i]]) ++j;
    // Positions i..j-1 (0-based) share rank mean((i+1)..j).
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (size_t t = i; t < j; ++t) ranks[order[t]] = rank;
    i = j;
  }
  return ranks;
}

double Spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("spearman: length mismatch");
  if (x.size() < 2) throw ValidationError("spearman: need at least two points");
  const std::vector<double> rx = AverageRanks(x);
  const std::vector<double> ry = AverageRanks(y);
  const double n = static_cast<double>(x.size());
  // Mean rank is (n + 1) / 2 regardless of ties.
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("spearman: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> TwoProportionZ(int64_t w1, int64_t n1, int64_t w2,
                                     int64_t n2) {
  if (n1 <= 0 || n2 <= 0) throw ValidationError("two-proportion z: empty group");
  if (w1 < 0 || w1 > n1 || w2 < 0 || w2 > n2) {
    throw ValidationError("two-proportion z: successes outside [0, n]");
  }
  const double p1 = static_cast<double>(w1) / static_cast<double>(n1);
  const double p2 = static_cast<double>(w2) / static_cast<double>(n2);
  const double pooled =
      static_cast<double>(w1 + w2) / static_cast<double>(n1 + n2);
  if (w1 + w2 == 0 || w1 + w2 == n1 + n2) return std::nullopt;
  const double se = std::sqrt(pooled * (1.0 - pooled) *
                              (1.0 / static_cast<double>(n1) +
                               1.0 / static_cast<double>(n2)));
  return (p1 - p2) / se;
}

double BinomialTest(int64_t k, int64_t n, double p0) {
  if (n < 1 || k < 0 || k > n) throw ValidationError("binomial test: need 0 <= k <= n, n >= 1");
  if (!(p0 > 0.0 && p0 < 1.0)) throw ValidationError("binomial test: p0 must lie in (0, 1)");
  const double lp = std::log(p0);
  const double lq = std::log1p(-p0);
  const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
  auto log_pmf = [&](int64_t i) {
    const double di = static_cast<double>(i);
    return lgn - std::lgamma(di + 1.0) - std::lgamma(static_cast<double>(n - i) + 1.0) +
           di * lp + static_cast<double>(n - i) * lq;
  };
  // Relative slack so that outcomes tied with the observed one in exact
  // arithmetic are not lost to rounding.
  const double threshold = log_pmf(k) + std::log1p(1e-7);
  double total = 0.0;
  for (int64_t i = 0; i <= n; ++i) {
    const double lpi = log_pmf(i);
    if (lpi <= threshold) total += std::exp(lpi);
  }
  return std::min(1.0, total);
}

double Jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t common = 0;
  for (const auto& item : a) common += b.count(item);
  const size_t uni = a.size() + b.size() - common;
  return static_cast<double>(common) / static_cast<double>(uni);
}

std::optional<double> CohenKappaFromConfusion(
    const std::vector<std::vector<int64_t>>& confusion) {
  const size_t k = confusion.size();
  if (k == 0) throw ValidationError("cohen kappa: empty confusion matrix");
  std::vector<double> rows(k, 0.0), cols(k, 0.0);
  double n = 0.0, agree = 0.0;
  for (size_t i = 0; i < k; ++i) {
    if (confusion[i].size() != k) throw ValidationError("cohen kappa: matrix not square");
    for (size_t j = 0; j < k; ++j) {
      const auto c = static_cast<double>(confusion[i][j]);
      if (c < 0) throw ValidationError("cohen kappa: negative count");
      rows[i] += c;
      cols[j] += c;
      n += c;
      if (i == j) agree += c;
    }
  }
  if (n <= 0) throw ValidationError("cohen kappa: no items");
  // Integer-valued form (n*agree - sum r*c) / (n^2 - sum r*c) keeps every
  // intermediate exact for realistic counts.
  double chance = 0.0;
  for (size_t i = 0; i < k; ++i) chance += rows[i] * cols[i];
  const double denom = n * n - chance;
  if (denom == 0.0) return std::nullopt;
  return (n * agree - chance) / denom;
}

std::optional<double> CohenKappa(std::span<const std::string> labels_a,
                                 std::span<const std::string> labels_b) {
  if (labels_a.size() != labels_b.size()) throw ValidationError("cohen kappa: length mismatch");
  if (labels_a.empty()) throw ValidationError("cohen kappa: no items");
  std::map<std::string, size_t> alphabet;
  for (const auto& l : labels_a) alphabet.emplace(l, 0);
  for (const auto& l : labels_b) alphabet.emplace(l, 0);
  size_t next = 0;
  for (auto& [label, index] : alphabet) index = next++;
  std::vector<std::vector<int64_t>> confusion(alphabet.size(),
                                              std::vector<int64_t>(alphabet.size(), 0));
  for (size_t i = 0; i < labels_a.size(); ++i) {
    ++confusion[alphabet.at(labels_a[i])][alphabet.at(labels_b[i])];
  }
  return CohenKappaFromConfusion(confusion);
}

double KrippendorffAlphaNominal(std::span<const RatingUnit> units) {
  std::map<std::string, std::map<std::string, std::string>> by_item;
  for (const auto& u : units) {
    if (!by_item[u.item].emplace(u.rater, u.label).second) {
      throw ValidationError("krippendorff alpha: rater \"" + u.rater +
                            "\" labels item \"" + u.item + "\" twice");
    }
  }
  std::map<std::string, size_t> categories;
  for (const auto& u : units) categories.emplace(u.label, 0);
  size_t next = 0;
  for (auto& [label, index] : categories) index = next++;
  const size_t c = categories.size();

  std::vector<std::vector<double>> coincidence(c, std::vector<double>(c, 0.0));
  size_t pairable_items = 0;
  for (const auto& [item, ratings] : by_item) {
    const size_t m = ratings.size();
    if (m < 2) continue;
    ++pairable_items;
    std::vector<double> counts(c, 0.0);
    for (const auto& [rater, label] : ratings) counts[categories.at(label)] += 1.0;
    const double scale = 1.0 / static_cast<double>(m - 1);
    for (size_t a = 0; a < c; ++a) {
      for (size_t b = 0; b < c; ++b) {
        const double pairs = a == b ? counts[a] * (counts[a] - 1.0) : counts[a] * counts[b];
        coincidence[a][b] += pairs * scale;
      }
    }
  }
  if (pairable_items == 0) throw ValidationError("krippendorff alpha: no co-labeled items");

  std::vector<double> marginals(c, 0.0);
  double n = 0.0, observed = 0.0;
  for (size_t a = 0; a < c; ++a) {
    for (size_t b = 0; b < c; ++b) {
      marginals[a] += coincidence[a][b];
      if (a != b) observed += coincidence[a][b];
    }
    n += marginals[a];
  }
  if (observed == 0.0) return 1.0;
  double expected_pairs = 0.0;
  for (size_t a = 0; a < c; ++a) {
    for (size_t b = 0; b < c; ++b) {
      if (a != b) expected_pairs += marginals[a] * marginals[b];
    }
  }
  return 1.0 - (n - 1.0) * observed / expected_pairs;
}

std::optional<std::string> MajorityVote(std::span<const std::string> labels) {
  if (labels.empty() || labels.size() % 2 == 0) {
    throw ValidationError("majority vote needs an odd panel, got " +
                          std::to_string(labels.size()) + " labels");
  }
  std::map<std::string, size_t> counts;
  for (const auto& l : labels) ++counts[l];
  for (const auto& [label, count] : counts) {
    if (2 * count > labels.size()) return label;
  }
  return std::nullopt;
}

}  // namespace slicerank::stats
