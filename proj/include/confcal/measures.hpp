#pragma once

// Probability/logit vectors, the four confidence measures, and temperature softmax.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "confcal/errors.hpp"

namespace confcal {

/// A point on the probability simplex over k >= 2 classes.
class ProbVector {
 public:
  static constexpr double kTolerance = 1e-6;

  explicit ProbVector(std::vector<double> entries, double tolerance = kTolerance)
      : entries_(std::move(entries)) {
    if (entries_.size() < 2) {
      throw ValidationError("probability vector needs at least 2 entries, got " +
                            std::to_string(entries_.size()));
    }
    double sum = 0.0;
    for (double v : entries_) {
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw ValidationError("probability entry out of [0,1]: " + std::to_string(v));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > tolerance) {
      throw ValidationError("probabilities sum to " + std::to_string(sum) + ", expected 1");
    }
  }

  static ProbVector uniform(std::size_t k) {
    return ProbVector(std::vector<double>(k, 1.0 / static_cast<double>(k)));
  }

  static ProbVector one_hot(std::size_t k, std::size_t hot) {
    std::vector<double> v(k, 0.0);
    v.at(hot) = 1.0;
    return ProbVector(std::move(v));
  }

  std::span<const double> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }

  /// Entries sorted in descending order (stable).
  std::vector<double> sorted() const {
    std::vector<double> s = entries_;
    std::stable_sort(s.begin(), s.end(), std::greater<>());
    return s;
  }

  friend bool operator==(const ProbVector&, const ProbVector&) = default;

 private:
  std::vector<double> entries_;
};

/// Pre-softmax scores for k >= 2 classes; all entries finite.
class LogitVector {
 public:
  explicit LogitVector(std::vector<double> entries) : entries_(std::move(entries)) {
    if (entries_.size() < 2) {
      throw ValidationError("logit vector needs at least 2 entries, got " +
                            std::to_string(entries_.size()));
    }
    for (double v : entries_) {
      if (!std::isfinite(v)) throw ValidationError("non-finite logit");
    }
  }

  std::span<const double> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  double operator[](std::size_t i) const { return entries_[i]; }

  friend bool operator==(const LogitVector&, const LogitVector&) = default;

 private:
  std::vector<double> entries_;
};

enum class MeasureId { max, margin2, margin3, entropy };

inline constexpr std::array<MeasureId, 4> kAllMeasures = {MeasureId::max, MeasureId::margin2,
                                                          MeasureId::margin3, MeasureId::entropy};

constexpr std::string_view to_string(MeasureId m) {
  switch (m) {
    case MeasureId::max: return "max";
    case MeasureId::margin2: return "margin2";
    case MeasureId::margin3: return "margin3";
    case MeasureId::entropy: return "entropy";
  }
  return "?";
}

inline MeasureId parse_measure(std::string_view name) {
  for (MeasureId m : kAllMeasures) {
    if (to_string(m) == name) return m;
  }
  throw ValidationError("unknown confidence measure '" + std::string(name) + "'");
}

namespace detail {

/// Three largest entries, descending; missing ones (k = 2) are 0.
inline std::array<double, 3> top3(std::span<const double> v) {
  std::array<double, 3> top{0.0, 0.0, 0.0};
  std::size_t filled = 0;
  for (double x : v) {
    std::size_t pos = filled < 3 ? filled : 3;
    while (pos > 0 && top[pos - 1] < x) {
      if (pos < 3) top[pos] = top[pos - 1];
      --pos;
    }
    if (pos < 3) top[pos] = x;
    if (filled < 3) ++filled;
  }
  return top;
}

inline double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

inline double confidence_max(std::span<const double> v) { return top3(v)[0]; }

inline double confidence_margin2(std::span<const double> v) {
  auto t = top3(v);
  return clamp_unit(t[0] - t[1]);
}

inline double confidence_margin3(std::span<const double> v) {
  auto t = top3(v);
  return clamp_unit(t[0] - (0.5 * t[1] + 0.5 * t[2]));
}

// 0 log 0 = 0. Oriented so one-hot -> 1, uniform -> 0.
inline double confidence_entropy(std::span<const double> v) {
  double h = 0.0;
  for (double x : v) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return clamp_unit(1.0 - h / std::log(static_cast<double>(v.size())));
}

inline double confidence(MeasureId m, std::span<const double> v) {
  switch (m) {
    case MeasureId::max: return confidence_max(v);
    case MeasureId::margin2: return confidence_margin2(v);
    case MeasureId::margin3: return confidence_margin3(v);
    case MeasureId::entropy: return confidence_entropy(v);
  }
  return 0.0;
}

/// out = softmax(z / T); out.size() must equal z.size(). Caller checks T > 0.
inline void softmax_into(std::span<const double> z, double temperature, std::span<double> out) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp((z[i] - zmax) / temperature);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
}

/// log softmax(z / T)[index], computed with log-sum-exp.
inline double log_softmax_at(std::span<const double> z, double temperature, std::size_t index) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double x : z) sum += std::exp((x - zmax) / temperature);
  return (z[index] - zmax) / temperature - std::log(sum);
}

inline void check_temperature(double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw DomainError("temperature must be positive and finite, got " +
                      std::to_string(temperature));
  }
}

}  // namespace detail

inline double confidence_max(const ProbVector& v) { return detail::confidence_max(v.entries()); }
inline double confidence_margin2(const ProbVector& v) {
  return detail::confidence_margin2(v.entries());
}
/// For k = 2 the missing third entry counts as 0.
inline double confidence_margin3(const ProbVector& v) {
  return detail::confidence_margin3(v.entries());
}
/// 1 - H(v) / log k.
inline double confidence_entropy(const ProbVector& v) {
  return detail::confidence_entropy(v.entries());
}
inline double confidence(MeasureId m, const ProbVector& v) {
  return detail::confidence(m, v.entries());
}

/// softmax(z / T). T = 1 is the identity on the model output; T -> inf approaches 1/k.
inline ProbVector softmax_temperature(const LogitVector& z, double temperature) {
  detail::check_temperature(temperature);
  std::vector<double> out(z.size());
  detail::softmax_into(z.entries(), temperature, out);
  return ProbVector(std::move(out));
}

/// Entrywise log(max(v_i, epsilon)). softmax of the result reproduces v up to the clamp.
inline LogitVector probs_to_logits(const ProbVector& v, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  std::vector<double> z(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) z[i] = std::log(std::max(v[i], epsilon));
  return LogitVector(std::move(z));
}

}  // namespace confcal
