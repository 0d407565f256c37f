#pragma once

// Per-measure evaluation bundle: ECE/ACE in both norms, sharpness and the l2
// decomposition, out of the box and (optionally) after temperature scaling.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "confcal/binning.hpp"
#include "confcal/dataset.hpp"
#include "confcal/measures.hpp"
#include "confcal/metrics.hpp"
#include "confcal/scaling.hpp"

namespace confcal {

enum class Regime { oob, ts };

constexpr std::string_view to_string(Regime r) { return r == Regime::oob ? "oob" : "ts"; }

struct EvalConfig {
  std::size_t bins = kDefaultBins;
  /// Binning used for sharpness and the decomposition. ECE always uses fixed
  /// bins and ACE adaptive bins, both with `bins` bins.
  BinningStrategy binning = BinningStrategy::adaptive;
  std::vector<MeasureId> measures{kAllMeasures.begin(), kAllMeasures.end()};
  std::optional<double> recovery_epsilon;
};

struct MeasureReport {
  MeasureId measure = MeasureId::max;
  Regime regime = Regime::oob;
  std::optional<double> temperature;
  double accuracy = 0.0;
  double ece_l1 = 0.0;
  double ace_l1 = 0.0;
  double ece_l2 = 0.0;
  double ace_l2 = 0.0;
  double sharpness = 0.0;
  Decomposition decomposition;
};

struct CalibrationReport {
  std::size_t samples = 0;
  std::size_t num_classes = 0;
  EvalConfig config;
  std::map<std::string, std::string> metadata;
  /// OOB rows first (in measure order), then TS rows.
  std::vector<MeasureReport> rows;

  const MeasureReport* find(MeasureId m, Regime r) const {
    for (const auto& row : rows) {
      if (row.measure == m && row.regime == r) return &row;
    }
    return nullptr;
  }
};

inline MeasureReport evaluate_measure(const Dataset& dataset, MeasureId measure,
                                      const EvalConfig& config) {
  require_non_empty(dataset);
  const ScoredSamples s = score(dataset, measure);
  const Binning fixed = fixed_binning(config.bins);
  const Binning adaptive = adaptive_binning(s.confidence, config.bins);
  const BinStats fixed_stats = bin_stats(s, fixed);
  const BinStats adaptive_stats = bin_stats(s, adaptive);
  const Binning& primary = config.binning == BinningStrategy::fixed ? fixed : adaptive;

  MeasureReport r;
  r.measure = measure;
  r.accuracy = fixed_stats.mean_correctness;
  r.ece_l1 = calibration_error(fixed_stats, Norm::l1, Weighting::by_count);
  r.ece_l2 = calibration_error(fixed_stats, Norm::l2, Weighting::by_count);
  r.ace_l1 = calibration_error(adaptive_stats, Norm::l1, Weighting::uniform);
  r.ace_l2 = calibration_error(adaptive_stats, Norm::l2, Weighting::uniform);
  r.decomposition = decompose(s, primary);
  r.sharpness = r.decomposition.sharpness;
  return r;
}

/// Evaluates every configured measure out of the box, plus a temperature-scaled
/// row for each measure that has an entry in `temperatures`.
inline CalibrationReport evaluate_all(
    const Dataset& dataset, const EvalConfig& config = {},
    const std::map<MeasureId, double>& temperatures = {}) {
  require_non_empty(dataset);
  CalibrationReport report;
  report.samples = dataset.size();
  report.num_classes = dataset.num_classes();
  report.config = config;
  report.metadata = dataset.metadata;
  for (MeasureId m : config.measures) {
    report.rows.push_back(evaluate_measure(dataset, m, config));
  }
  for (MeasureId m : config.measures) {
    auto it = temperatures.find(m);
    if (it == temperatures.end()) continue;
    MeasureReport row =
        it->second == 1.0
            ? evaluate_measure(dataset, m, config)
            : evaluate_measure(apply_temperature(dataset, it->second, config.recovery_epsilon), m,
                               config);
    row.regime = Regime::ts;
    row.temperature = it->second;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace confcal
