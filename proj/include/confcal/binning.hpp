#pragma once

// Partitions of the confidence interval [0,1] into bins.
//
// Closure convention (shared by both strategies): bin b holds scores s with
// edges[b] < s <= edges[b+1]; the first bin also holds s = 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "confcal/errors.hpp"

namespace confcal {

enum class BinningStrategy { fixed, adaptive };

inline constexpr std::size_t kDefaultBins = 15;

constexpr std::string_view to_string(BinningStrategy s) {
  return s == BinningStrategy::fixed ? "fixed" : "adaptive";
}

inline BinningStrategy parse_binning_strategy(std::string_view name) {
  if (name == "fixed") return BinningStrategy::fixed;
  if (name == "adaptive") return BinningStrategy::adaptive;
  throw ValidationError("unknown binning strategy '" + std::string(name) + "'");
}

class Binning {
 public:
  Binning(std::vector<double> edges, BinningStrategy strategy, std::size_t target_bins)
      : edges_(std::move(edges)), strategy_(strategy), target_bins_(target_bins) {
    if (edges_.size() < 2 || edges_.front() != 0.0 || edges_.back() != 1.0) {
      throw ValidationError("bin edges must start at 0 and end at 1");
    }
    if (std::adjacent_find(edges_.begin(), edges_.end(), std::greater_equal<>()) != edges_.end()) {
      throw ValidationError("bin edges must be strictly increasing");
    }
    if (bin_count() > target_bins_) {
      throw ValidationError("more bins than the requested granularity");
    }
  }

  std::span<const double> edges() const noexcept { return edges_; }
  std::size_t bin_count() const noexcept { return edges_.size() - 1; }
  BinningStrategy strategy() const noexcept { return strategy_; }
  std::size_t target_bins() const noexcept { return target_bins_; }

  /// Index of the bin containing `score`.
  std::size_t assign(double score) const {
    if (!(score >= 0.0 && score <= 1.0)) {
      throw DomainError("score outside [0,1]: " + std::to_string(score));
    }
    auto it = std::lower_bound(edges_.begin() + 1, edges_.end() - 1, score);
    return static_cast<std::size_t>(it - (edges_.begin() + 1));
  }

  friend bool operator==(const Binning&, const Binning&) = default;

 private:
  std::vector<double> edges_;
  BinningStrategy strategy_;
  std::size_t target_bins_;
};

inline std::size_t assign(const Binning& binning, double score) { return binning.assign(score); }

/// n equal-width bins with edges i/n.
inline Binning fixed_binning(std::size_t n) {
  if (n == 0) throw DomainError("bin count must be at least 1");
  std::vector<double> edges(n + 1);
  for (std::size_t i = 0; i <= n; ++i) edges[i] = static_cast<double>(i) / static_cast<double>(n);
  edges[n] = 1.0;
  return Binning(std::move(edges), BinningStrategy::fixed, n);
}

/// Equal-mass bins over `scores`: the sorted scores are cut into n groups whose
/// sizes differ by at most one; each interior edge is the midpoint of the two
/// scores straddling the cut. Cuts between identical scores are dropped, so the
/// result may have fewer than n bins.
inline Binning adaptive_binning(std::span<const double> scores, std::size_t n) {
  if (n == 0) throw DomainError("bin count must be at least 1");
  if (scores.empty()) throw DomainError("adaptive binning needs at least one score");
  std::vector<double> sorted(scores.begin(), scores.end());
  for (double s : sorted) {
    if (!(s >= 0.0 && s <= 1.0)) throw DomainError("score outside [0,1]: " + std::to_string(s));
  }
  std::sort(sorted.begin(), sorted.end());

  const std::size_t m = sorted.size();
  std::vector<double> edges{0.0};
  for (std::size_t g = 1; g < n; ++g) {
    const std::size_t cut = g * m / n;  // first index of group g
    if (cut == 0 || cut >= m) continue;
    const double lo = sorted[cut - 1];
    const double hi = sorted[cut];
    if (!(lo < hi)) continue;
    double mid = lo + (hi - lo) / 2.0;
    if (mid >= hi) mid = lo;  // adjacent doubles: keep `hi` strictly above the edge
    if (mid <= edges.back() || mid >= 1.0) continue;
    edges.push_back(mid);
  }
  edges.push_back(1.0);
  return Binning(std::move(edges), BinningStrategy::adaptive, n);
}

/// Builds a binning of the requested strategy; adaptive bins are fitted to `scores`.
inline Binning make_binning(BinningStrategy strategy, std::size_t n,
                            std::span<const double> scores) {
  return strategy == BinningStrategy::fixed ? fixed_binning(n) : adaptive_binning(scores, n);
}

}  // namespace confcal
