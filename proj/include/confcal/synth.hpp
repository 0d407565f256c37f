#pragma once

// Synthetic prediction streams with a known correct temperature.
//
// Per record: q ~ Dirichlet(alpha * 1_k), y ~ Categorical(q), z = a * log q,
// p = softmax(z). With a = 1 the model is calibrated by construction, and for
// any a the temperature T = a restores q exactly.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "confcal/dataset.hpp"
#include "confcal/errors.hpp"
#include "confcal/measures.hpp"

namespace confcal {

struct SynthConfig {
  std::size_t n = 1000;
  std::size_t k = 5;
  double alpha = 1.0;
  double distortion = 1.0;
  std::uint64_t seed = 0;
  /// When set, record i gets a domain tag "d<j>" with j uniform in [0, domain_count).
  std::optional<std::size_t> domain_count;

  void validate() const {
    if (n < 1) throw DomainError("synth: n must be at least 1");
    if (k < 2) throw DomainError("synth: k must be at least 2");
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("synth: alpha must be positive");
    if (!(distortion > 0.0) || !std::isfinite(distortion)) {
      throw DomainError("synth: distortion must be positive");
    }
    if (domain_count && *domain_count == 0) throw DomainError("synth: domain count must be >= 1");
  }
};

inline constexpr const char* kSynthRng = "mt19937_64 per record, seeded splitmix64(seed, index)";

struct SynthOutput {
  Dataset dataset;
  /// True conditional class distribution q of each record.
  std::vector<std::vector<double>> truth;
  double distortion = 1.0;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::mt19937_64 record_engine(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

}  // namespace detail

inline SynthOutput generate(const SynthConfig& config) {
  config.validate();
  SynthOutput out;
  out.distortion = config.distortion;
  out.truth.reserve(config.n);
  out.dataset.metadata = {
      {"source", "synth"},
      {"seed", std::to_string(config.seed)},
      {"rng", kSynthRng},
      {"n", std::to_string(config.n)},
      {"k", std::to_string(config.k)},
      {"alpha", std::to_string(config.alpha)},
      {"distortion", std::to_string(config.distortion)},
  };

  std::gamma_distribution<double> gamma(config.alpha, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t i = 0; i < config.n; ++i) {
    auto rng = detail::record_engine(config.seed, i);
    gamma.reset();

    std::vector<double> q(config.k);
    double sum = 0.0;
    for (double& x : q) {
      // Small alpha can underflow to 0; keep log q finite.
      x = std::max(gamma(rng), std::numeric_limits<double>::min());
      sum += x;
    }
    for (double& x : q) x /= sum;

    const double u = unit(rng);
    std::size_t label = config.k - 1;
    double cumulative = 0.0;
    for (std::size_t c = 0; c < config.k; ++c) {
      cumulative += q[c];
      if (u < cumulative) {
        label = c;
        break;
      }
    }

    std::optional<std::string> domain;
    if (config.domain_count) {
      std::uniform_int_distribution<std::size_t> pick(0, *config.domain_count - 1);
      domain = "d" + std::to_string(pick(rng));
    }

    std::vector<double> z(config.k);
    for (std::size_t c = 0; c < config.k; ++c) z[c] = config.distortion * std::log(q[c]);
    LogitVector logits(std::move(z));
    ProbVector probs = softmax_temperature(logits, 1.0);
    out.dataset.push_back(PredictionRecord(std::move(logits), std::move(probs), label, domain));
    out.truth.push_back(std::move(q));
  }
  return out;
}

}  // namespace confcal
