#pragma once

// Temperature scaling: the classic NLL fit and the per-measure fit that
// minimizes a binned calibration error of c(softmax(z / T)) by line search.
//
// Both fits evaluate a log-spaced grid (T = 1 included whenever it lies in
// range) and then run one golden-section pass between the neighbours of the
// best grid point. The objective is piecewise constant in T for the binned
// error, so no derivatives are used. Ties go to the smaller temperature.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "confcal/binning.hpp"
#include "confcal/dataset.hpp"
#include "confcal/errors.hpp"
#include "confcal/measures.hpp"
#include "confcal/metrics.hpp"

namespace confcal {

struct TemperatureGrid {
  double t_min = 0.05;
  double t_max = 5.0;
  std::size_t steps = 200;

  void validate() const {
    if (!(t_min > 0.0) || !std::isfinite(t_max) || !(t_max >= t_min)) {
      throw DomainError("temperature grid needs 0 < t_min <= t_max");
    }
    if (steps == 0) throw DomainError("temperature grid needs at least one step");
  }

  /// Ascending, log-spaced candidates; T = 1 is added when t_min <= 1 <= t_max.
  std::vector<double> points() const {
    validate();
    std::vector<double> pts;
    if (steps == 1) {
      pts.push_back(t_min);
    } else {
      const double lo = std::log(t_min);
      const double hi = std::log(t_max);
      for (std::size_t i = 0; i < steps; ++i) {
        pts.push_back(std::exp(lo + (hi - lo) * static_cast<double>(i) /
                                        static_cast<double>(steps - 1)));
      }
      pts.front() = t_min;
      pts.back() = t_max;
    }
    if (t_min <= 1.0 && 1.0 <= t_max) pts.push_back(1.0);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    return pts;
  }

  friend bool operator==(const TemperatureGrid&, const TemperatureGrid&) = default;
};

enum class Objective { nll, calibration_error };

constexpr std::string_view to_string(Objective o) {
  return o == Objective::nll ? "nll" : "calibration_error";
}

struct TemperatureFit {
  double temperature = 1.0;
  double objective_value = 0.0;
  Objective objective = Objective::nll;
  std::optional<MeasureId> measure;
  TemperatureGrid grid;
};

/// Calibration-error objective for the per-measure fit. Adaptive bins are
/// refitted at each candidate T and scored with uniform weighting (ACE);
/// fixed bins use count weighting (ECE).
struct CalibrationObjective {
  BinningStrategy strategy = BinningStrategy::adaptive;
  std::size_t bins = kDefaultBins;
  Norm norm = Norm::l1;

  Weighting weighting() const {
    return strategy == BinningStrategy::adaptive ? Weighting::uniform : Weighting::by_count;
  }
};

/// Row-major n x k logit matrix plus labels, extracted once per fit.
struct LogitTable {
  std::size_t k = 0;
  std::vector<double> values;
  std::vector<std::size_t> labels;

  std::size_t size() const noexcept { return labels.size(); }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * k, k);
  }
};

/// Logits of every record; records without logits are recovered as
/// log(max(p, epsilon)) when `recovery_epsilon` is set, otherwise ConfigError.
inline LogitTable logit_table(const Dataset& dataset, std::optional<double> recovery_epsilon) {
  require_non_empty(dataset);
  LogitTable t;
  t.k = dataset.num_classes();
  t.values.reserve(dataset.size() * t.k);
  t.labels.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& r = dataset[i];
    if (r.logits) {
      t.values.insert(t.values.end(), r.logits->entries().begin(), r.logits->entries().end());
    } else if (recovery_epsilon) {
      const LogitVector z = probs_to_logits(r.probs, *recovery_epsilon);
      t.values.insert(t.values.end(), z.entries().begin(), z.entries().end());
    } else {
      throw ConfigError("record " + std::to_string(i) +
                        " has no logits and logit recovery (epsilon) is disabled");
    }
    t.labels.push_back(r.label);
  }
  return t;
}

namespace detail {

struct Candidate {
  double temperature;
  double value;

  bool better_than(const Candidate& other) const {
    return value < other.value || (value == other.value && temperature < other.temperature);
  }
};

/// Grid search followed by golden-section refinement (in log T) between the
/// neighbours of the best grid point. Returns the best point ever evaluated.
template <class Fn>
Candidate grid_then_golden(Fn&& objective, std::span<const double> grid) {
  std::size_t best_idx = 0;
  Candidate best{grid[0], objective(grid[0])};
  for (std::size_t i = 1; i < grid.size(); ++i) {
    Candidate c{grid[i], objective(grid[i])};
    if (c.better_than(best)) {
      best = c;
      best_idx = i;
    }
  }
  if (grid.size() < 2) return best;

  double a = std::log(grid[best_idx == 0 ? 0 : best_idx - 1]);
  double b = std::log(grid[std::min(best_idx + 1, grid.size() - 1)]);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto eval = [&](double log_t) {
    Candidate c{std::exp(log_t), objective(std::exp(log_t))};
    if (c.better_than(best)) best = c;
    return c.value;
  };
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = eval(x1);
  double f2 = eval(x2);
  for (int iter = 0; iter < 60 && (b - a) > 1e-7; ++iter) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = eval(x2);
    }
  }
  return best;
}

}  // namespace detail

/// Mean negative log-likelihood of the true labels under softmax(z / T).
inline double nll_at(const LogitTable& table, double temperature) {
  detail::check_temperature(temperature);
  double total = 0.0;
  for (std::size_t i = 0; i < table.size(); ++i) {
    total -= detail::log_softmax_at(table.row(i), temperature, table.labels[i]);
  }
  return total / static_cast<double>(table.size());
}

/// Confidence and correctness of every record after scaling by T.
inline ScoredSamples score_at(const LogitTable& table, MeasureId measure, double temperature) {
  detail::check_temperature(temperature);
  ScoredSamples s;
  s.confidence.resize(table.size());
  s.correct.resize(table.size());
  std::vector<double> p(table.k);
  for (std::size_t i = 0; i < table.size(); ++i) {
    detail::softmax_into(table.row(i), temperature, p);
    s.confidence[i] = detail::confidence(measure, p);
    const auto argmax = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    s.correct[i] = argmax == table.labels[i] ? 1 : 0;
  }
  return s;
}

inline double calibration_error_at(const LogitTable& table, MeasureId measure, double temperature,
                                   const CalibrationObjective& objective) {
  const ScoredSamples s = score_at(table, measure, temperature);
  const Binning binning = make_binning(objective.strategy, objective.bins, s.confidence);
  return calibration_error(bin_stats(s, binning), objective.norm, objective.weighting());
}

inline TemperatureFit fit_nll(const Dataset& validation, const TemperatureGrid& grid = {},
                              std::optional<double> recovery_epsilon = std::nullopt) {
  const LogitTable table = logit_table(validation, recovery_epsilon);
  const std::vector<double> pts = grid.points();
  const auto best = detail::grid_then_golden([&](double t) { return nll_at(table, t); }, pts);
  return TemperatureFit{best.temperature, best.value, Objective::nll, std::nullopt, grid};
}

inline TemperatureFit fit_for_measure(const Dataset& validation, MeasureId measure,
                                      const CalibrationObjective& objective = {},
                                      const TemperatureGrid& grid = {},
                                      std::optional<double> recovery_epsilon = std::nullopt) {
  const LogitTable table = logit_table(validation, recovery_epsilon);
  const std::vector<double> pts = grid.points();
  const auto best = detail::grid_then_golden(
      [&](double t) { return calibration_error_at(table, measure, t, objective); }, pts);
  return TemperatureFit{best.temperature, best.value, Objective::calibration_error, measure, grid};
}

/// Replaces every record's output by softmax(z / T) and its logits by z / T.
/// Labels, order, domain tags and metadata are kept.
inline Dataset apply_temperature(const Dataset& dataset, double temperature,
                                 std::optional<double> recovery_epsilon = std::nullopt) {
  detail::check_temperature(temperature);
  Dataset out;
  out.metadata = dataset.metadata;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& r = dataset[i];
    std::vector<double> z;
    if (r.logits) {
      z.assign(r.logits->entries().begin(), r.logits->entries().end());
    } else if (recovery_epsilon) {
      const LogitVector rec = probs_to_logits(r.probs, *recovery_epsilon);
      z.assign(rec.entries().begin(), rec.entries().end());
    } else {
      throw ConfigError("record " + std::to_string(i) +
                        " has no logits and logit recovery (epsilon) is disabled");
    }
    for (double& x : z) x /= temperature;
    LogitVector scaled(std::move(z));
    ProbVector p = softmax_temperature(scaled, 1.0);
    out.push_back(PredictionRecord(std::move(scaled), std::move(p), r.label, r.domain));
  }
  return out;
}

}  // namespace confcal
