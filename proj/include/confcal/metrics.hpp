#pragma once

// Binned calibration error (ECE/ACE), sharpness and the l2 decomposition
//
//   E[(r - c)^2] = Var[r] - Var[T_B] + E[(T_B - c)^2]
//
// where r is per-sample correctness, c is the confidence replaced by its bin
// mean, and T_B is the bin mean of r. The cross term vanishes exactly because
// both c and T_B are constant within a bin.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "confcal/binning.hpp"
#include "confcal/dataset.hpp"
#include "confcal/errors.hpp"
#include "confcal/measures.hpp"

namespace confcal {

enum class Norm { l1, l2 };
enum class Weighting { by_count, uniform };

constexpr std::string_view to_string(Norm n) { return n == Norm::l1 ? "l1" : "l2"; }

inline Norm parse_norm(std::string_view name) {
  if (name == "l1") return Norm::l1;
  if (name == "l2") return Norm::l2;
  throw ValidationError("unknown norm '" + std::string(name) + "'");
}

/// 1 if the predicted class (argmax, lowest index on ties) equals the label.
inline int correctness(const PredictionRecord& record) {
  auto p = record.probs.entries();
  if (record.label >= p.size()) throw ValidationError("label out of range");
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = i;
  }
  return best == record.label ? 1 : 0;
}

/// Per-sample confidence under one measure, paired with correctness.
struct ScoredSamples {
  std::vector<double> confidence;
  std::vector<std::uint8_t> correct;

  std::size_t size() const noexcept { return confidence.size(); }
};

inline ScoredSamples score(const Dataset& dataset, MeasureId measure) {
  ScoredSamples out;
  out.confidence.reserve(dataset.size());
  out.correct.reserve(dataset.size());
  for (const auto& r : dataset.records()) {
    out.confidence.push_back(confidence(measure, r.probs));
    out.correct.push_back(static_cast<std::uint8_t>(correctness(r)));
  }
  return out;
}

struct Bin {
  std::size_t count = 0;
  double mean_confidence = 0.0;
  double mean_correctness = 0.0;

  bool occupied() const noexcept { return count > 0; }
};

/// Per-bin statistics. Empty bins keep count 0 and are ignored by every average.
struct BinStats {
  std::vector<Bin> bins;
  std::size_t total = 0;
  double mean_correctness = 0.0;

  std::size_t occupied_bins() const {
    std::size_t n = 0;
    for (const auto& b : bins) n += b.occupied() ? 1 : 0;
    return n;
  }
};

inline BinStats bin_stats(std::span<const double> confidence, std::span<const std::uint8_t> correct,
                          const Binning& binning) {
  if (confidence.size() != correct.size()) {
    throw ValidationError("confidence and correctness lengths differ");
  }
  if (confidence.empty()) throw ValidationError("no samples to bin");
  BinStats stats;
  stats.bins.resize(binning.bin_count());
  std::vector<double> conf_sum(binning.bin_count(), 0.0);
  std::vector<double> corr_sum(binning.bin_count(), 0.0);
  double corr_total = 0.0;
  for (std::size_t i = 0; i < confidence.size(); ++i) {
    const std::size_t b = binning.assign(confidence[i]);
    ++stats.bins[b].count;
    conf_sum[b] += confidence[i];
    corr_sum[b] += correct[i];
    corr_total += correct[i];
  }
  for (std::size_t b = 0; b < stats.bins.size(); ++b) {
    auto& bin = stats.bins[b];
    if (!bin.occupied()) continue;
    bin.mean_confidence = conf_sum[b] / static_cast<double>(bin.count);
    bin.mean_correctness = corr_sum[b] / static_cast<double>(bin.count);
  }
  stats.total = confidence.size();
  stats.mean_correctness = corr_total / static_cast<double>(stats.total);
  return stats;
}

inline BinStats bin_stats(const ScoredSamples& samples, const Binning& binning) {
  return bin_stats(samples.confidence, samples.correct, binning);
}

inline BinStats bin_stats(const Dataset& dataset, MeasureId measure, const Binning& binning) {
  require_non_empty(dataset);
  return bin_stats(score(dataset, measure), binning);
}

/// by_count weighting is the ECE convention, uniform (mean over occupied bins)
/// the ACE convention. l2 takes the root of the weighted mean squared residual.
inline double calibration_error(const BinStats& stats, Norm norm, Weighting weighting) {
  const std::size_t occupied = stats.occupied_bins();
  if (occupied == 0) throw DomainError("calibration error needs at least one occupied bin");
  double acc = 0.0;
  for (const auto& b : stats.bins) {
    if (!b.occupied()) continue;
    const double w = weighting == Weighting::by_count
                         ? static_cast<double>(b.count) / static_cast<double>(stats.total)
                         : 1.0 / static_cast<double>(occupied);
    const double residual = b.mean_correctness - b.mean_confidence;
    acc += norm == Norm::l1 ? w * std::abs(residual) : w * residual * residual;
  }
  return norm == Norm::l1 ? acc : std::sqrt(acc);
}

/// Count-weighted variance of bin correctness around the global correctness.
inline double sharpness(const BinStats& stats) {
  if (stats.occupied_bins() == 0) throw DomainError("sharpness needs at least one occupied bin");
  double acc = 0.0;
  for (const auto& b : stats.bins) {
    if (!b.occupied()) continue;
    const double d = b.mean_correctness - stats.mean_correctness;
    acc += static_cast<double>(b.count) / static_cast<double>(stats.total) * d * d;
  }
  return acc;
}

struct Decomposition {
  double l2_loss = 0.0;
  double variance_term = 0.0;
  double sharpness = 0.0;
  double calibration_l2 = 0.0;

  /// variance_term - sharpness + calibration_l2; equals l2_loss up to rounding.
  double reconstructed_loss() const { return variance_term - sharpness + calibration_l2; }
};

inline Decomposition decompose(const ScoredSamples& samples, const Binning& binning) {
  const BinStats stats = bin_stats(samples, binning);
  const double n = static_cast<double>(samples.size());
  Decomposition d;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Bin& b = stats.bins[binning.assign(samples.confidence[i])];
    const double r = samples.correct[i];
    const double loss = r - b.mean_confidence;
    const double var = r - stats.mean_correctness;
    const double cal = b.mean_correctness - b.mean_confidence;
    d.l2_loss += loss * loss;
    d.variance_term += var * var;
    d.calibration_l2 += cal * cal;
  }
  d.l2_loss /= n;
  d.variance_term /= n;
  d.calibration_l2 /= n;
  d.sharpness = sharpness(stats);
  return d;
}

inline Decomposition decompose(const Dataset& dataset, MeasureId measure, const Binning& binning) {
  require_non_empty(dataset);
  return decompose(score(dataset, measure), binning);
}

inline double accuracy(const Dataset& dataset) {
  require_non_empty(dataset);
  double hits = 0.0;
  for (const auto& r : dataset.records()) hits += correctness(r);
  return hits / static_cast<double>(dataset.size());
}

}  // namespace confcal
