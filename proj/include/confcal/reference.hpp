#pragma once

// Naive reference for the binned metrics: every quantity is recomputed with
// direct loops over samples and bins, sharing no code with metrics.hpp.
// Used to cross-check the production path on small datasets.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "confcal/binning.hpp"
#include "confcal/dataset.hpp"
#include "confcal/errors.hpp"
#include "confcal/measures.hpp"

namespace confcal::reference {

struct Result {
  std::vector<std::size_t> counts;
  std::vector<double> mean_confidence;
  std::vector<double> mean_correctness;
  double ece_l1 = 0.0;  // count-weighted
  double ece_l2 = 0.0;
  double ace_l1 = 0.0;  // uniform over occupied bins
  double ace_l2 = 0.0;
  double sharpness = 0.0;
  double l2_loss = 0.0;
  double variance_term = 0.0;
  double calibration_l2 = 0.0;
};

inline double measure_value(MeasureId measure, std::vector<double> v) {
  std::sort(v.begin(), v.end(), std::greater<>());
  const double v1 = v[0];
  const double v2 = v[1];
  const double v3 = v.size() > 2 ? v[2] : 0.0;
  switch (measure) {
    case MeasureId::max: return v1;
    case MeasureId::margin2: return std::clamp(v1 - v2, 0.0, 1.0);
    case MeasureId::margin3: return std::clamp(v1 - 0.5 * v2 - 0.5 * v3, 0.0, 1.0);
    case MeasureId::entropy: {
      double h = 0.0;
      for (double x : v) h += x > 0.0 ? -x * std::log(x) : 0.0;
      return std::clamp(1.0 - h / std::log(static_cast<double>(v.size())), 0.0, 1.0);
    }
  }
  return 0.0;
}

inline bool in_bin(std::span<const double> edges, std::size_t b, double s) {
  if (b == 0) return s >= edges[0] && s <= edges[1];
  return s > edges[b] && s <= edges[b + 1];
}

inline Result metrics(const Dataset& dataset, MeasureId measure, const Binning& binning) {
  if (dataset.empty()) throw ValidationError("dataset is empty");
  const std::size_t n = dataset.size();
  std::vector<double> conf(n);
  std::vector<double> corr(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = dataset[i];
    std::vector<double> p(r.probs.entries().begin(), r.probs.entries().end());
    conf[i] = measure_value(measure, p);
    std::size_t arg = 0;
    for (std::size_t c = 0; c < p.size(); ++c) {
      if (p[c] > p[arg]) arg = c;
    }
    corr[i] = arg == r.label ? 1.0 : 0.0;
  }

  const auto edges = binning.edges();
  const std::size_t bins = edges.size() - 1;
  Result res;
  res.counts.assign(bins, 0);
  res.mean_confidence.assign(bins, 0.0);
  res.mean_correctness.assign(bins, 0.0);
  for (std::size_t b = 0; b < bins; ++b) {
    double cs = 0.0;
    double rs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_bin(edges, b, conf[i])) continue;
      ++res.counts[b];
      cs += conf[i];
      rs += corr[i];
    }
    if (res.counts[b] > 0) {
      res.mean_confidence[b] = cs / static_cast<double>(res.counts[b]);
      res.mean_correctness[b] = rs / static_cast<double>(res.counts[b]);
    }
  }

  double global = 0.0;
  for (double r : corr) global += r;
  global /= static_cast<double>(n);

  std::size_t occupied = 0;
  for (std::size_t c : res.counts) occupied += c > 0 ? 1 : 0;
  for (std::size_t b = 0; b < bins; ++b) {
    if (res.counts[b] == 0) continue;
    const double gap = res.mean_correctness[b] - res.mean_confidence[b];
    const double wc = static_cast<double>(res.counts[b]) / static_cast<double>(n);
    const double wu = 1.0 / static_cast<double>(occupied);
    res.ece_l1 += wc * std::abs(gap);
    res.ece_l2 += wc * gap * gap;
    res.ace_l1 += wu * std::abs(gap);
    res.ace_l2 += wu * gap * gap;
    const double d = res.mean_correctness[b] - global;
    res.sharpness += wc * d * d;
  }
  res.ece_l2 = std::sqrt(res.ece_l2);
  res.ace_l2 = std::sqrt(res.ace_l2);

  for (std::size_t i = 0; i < n; ++i) {
    std::size_t b = 0;
    while (!in_bin(edges, b, conf[i])) ++b;
    const double loss = corr[i] - res.mean_confidence[b];
    const double var = corr[i] - global;
    const double cal = res.mean_correctness[b] - res.mean_confidence[b];
    res.l2_loss += loss * loss / static_cast<double>(n);
    res.variance_term += var * var / static_cast<double>(n);
    res.calibration_l2 += cal * cal / static_cast<double>(n);
  }
  return res;
}

}  // namespace confcal::reference
