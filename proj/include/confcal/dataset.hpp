#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "confcal/errors.hpp"
#include "confcal/measures.hpp"

namespace confcal {

/// One classified sample: the model output (logits optional), the true label,
/// and an optional domain tag (e.g. the reviewer id).
struct PredictionRecord {
  static constexpr double kLogitConsistency = 1e-4;

  std::optional<LogitVector> logits;
  ProbVector probs;
  std::size_t label;
  std::optional<std::string> domain;

  PredictionRecord(ProbVector p, std::size_t y, std::optional<std::string> d = std::nullopt)
      : probs(std::move(p)), label(y), domain(std::move(d)) {
    validate();
  }

  PredictionRecord(LogitVector z, std::size_t y, std::optional<std::string> d = std::nullopt)
      : logits(std::move(z)), probs(softmax_temperature(*logits, 1.0)), label(y),
        domain(std::move(d)) {
    validate();
  }

  PredictionRecord(LogitVector z, ProbVector p, std::size_t y,
                   std::optional<std::string> d = std::nullopt)
      : logits(std::move(z)), probs(std::move(p)), label(y), domain(std::move(d)) {
    validate();
  }

  std::size_t num_classes() const noexcept { return probs.size(); }

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;

 private:
  void validate() const {
    if (label >= probs.size()) {
      throw ValidationError("label " + std::to_string(label) + " out of range for k=" +
                            std::to_string(probs.size()));
    }
    if (logits) {
      if (logits->size() != probs.size()) {
        throw ValidationError("logits and probs differ in length");
      }
      std::vector<double> s(probs.size());
      detail::softmax_into(logits->entries(), 1.0, s);
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (std::abs(s[i] - probs[i]) > kLogitConsistency) {
          throw ValidationError("softmax(logits) disagrees with probs");
        }
      }
    }
  }
};

/// Ordered records sharing one class count. `metadata` carries free-form
/// provenance (source, seed, split name).
class Dataset {
 public:
  Dataset() = default;

  explicit Dataset(std::vector<PredictionRecord> records,
                   std::map<std::string, std::string> metadata = {})
      : metadata(std::move(metadata)) {
    records_.reserve(records.size());
    for (auto& r : records) push_back(std::move(r));
  }

  void push_back(PredictionRecord record) {
    if (!records_.empty() && record.num_classes() != k_) {
      throw ValidationError("inconsistent class count: record " + std::to_string(records_.size()) +
                            " has k=" + std::to_string(record.num_classes()) + ", expected " +
                            std::to_string(k_));
    }
    k_ = record.num_classes();
    records_.push_back(std::move(record));
  }

  const std::vector<PredictionRecord>& records() const noexcept { return records_; }
  const PredictionRecord& operator[](std::size_t i) const { return records_[i]; }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }
  /// 0 for an empty dataset.
  std::size_t num_classes() const noexcept { return k_; }

  bool all_have_logits() const {
    for (const auto& r : records_) {
      if (!r.logits) return false;
    }
    return true;
  }

  std::map<std::string, std::string> metadata;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  std::vector<PredictionRecord> records_;
  std::size_t k_ = 0;
};

inline void require_non_empty(const Dataset& d) {
  if (d.empty()) throw ValidationError("dataset is empty");
}

}  // namespace confcal
