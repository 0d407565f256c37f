#include <algorithm>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "confcal/metrics.hpp"
#include "confcal/reference.hpp"
#include "test_support.hpp"

namespace {

using namespace confcal;
using confcal::testing::random_dataset;

// Binary records whose max-confidence equals `conf` and whose correctness is `ok`.
Dataset binary_dataset(const std::vector<double>& conf, const std::vector<int>& ok) {
  Dataset d;
  for (std::size_t i = 0; i < conf.size(); ++i) {
    d.push_back(PredictionRecord(ProbVector({conf[i], 1.0 - conf[i]}), ok[i] ? 0u : 1u));
  }
  return d;
}

ScoredSamples samples(std::vector<double> conf, std::vector<std::uint8_t> ok) {
  return ScoredSamples{std::move(conf), std::move(ok)};
}

TEST(Correctness, Examples) {
  EXPECT_EQ(correctness(PredictionRecord(ProbVector({0.7, 0.3}), 0)), 1);
  EXPECT_EQ(correctness(PredictionRecord(ProbVector({0.7, 0.3}), 1)), 0);
  EXPECT_EQ(correctness(PredictionRecord(ProbVector({0.5, 0.5}), 1)), 0);
  EXPECT_EQ(correctness(PredictionRecord(ProbVector({0.5, 0.5}), 0)), 1);
  EXPECT_THROW(PredictionRecord(ProbVector({0.5, 0.5}), 2), ValidationError);
}

TEST(BinStats, TwoBinExample) {
  const auto s = samples({0.2, 0.4, 0.6, 0.8}, {0, 0, 1, 1});
  const BinStats st = bin_stats(s, fixed_binning(2));
  ASSERT_EQ(st.bins.size(), 2u);
  EXPECT_EQ(st.bins[0].count, 2u);
  EXPECT_NEAR(st.bins[0].mean_confidence, 0.3, 1e-15);
  EXPECT_EQ(st.bins[0].mean_correctness, 0.0);
  EXPECT_EQ(st.bins[1].count, 2u);
  EXPECT_NEAR(st.bins[1].mean_confidence, 0.7, 1e-15);
  EXPECT_EQ(st.bins[1].mean_correctness, 1.0);

  EXPECT_NEAR(calibration_error(st, Norm::l1, Weighting::by_count), 0.3, 1e-15);
  EXPECT_NEAR(sharpness(st), 0.25, 1e-15);
}

TEST(BinStats, DatasetPathMatchesHandExample) {
  // max-confidence of a binary vector is at least 0.5, so use k = 10 records whose
  // top entry carries the desired score.
  Dataset d;
  const std::vector<double> conf{0.2, 0.4, 0.6, 0.8};
  const std::vector<int> ok{0, 0, 1, 1};
  for (std::size_t i = 0; i < conf.size(); ++i) {
    std::vector<double> p(10, (1.0 - conf[i]) / 9.0);
    p[3] = conf[i];
    d.push_back(PredictionRecord(ProbVector(p), ok[i] ? 3u : 0u));
  }
  const BinStats st = bin_stats(d, MeasureId::max, fixed_binning(2));
  EXPECT_NEAR(calibration_error(st, Norm::l1, Weighting::by_count), 0.3, 1e-12);
  EXPECT_NEAR(sharpness(st), 0.25, 1e-12);
}

TEST(BinStats, SingleAndIdenticalRecords) {
  const BinStats one = bin_stats(samples({0.65}, {1}), fixed_binning(15));
  EXPECT_EQ(one.occupied_bins(), 1u);
  const Bin& b = one.bins[fixed_binning(15).assign(0.65)];
  EXPECT_EQ(b.mean_confidence, 0.65);
  EXPECT_EQ(b.mean_correctness, 1.0);
  EXPECT_EQ(sharpness(one), 0.0);

  const BinStats same = bin_stats(samples({0.7, 0.7, 0.7, 0.7}, {1, 0, 1, 1}), fixed_binning(4));
  EXPECT_EQ(same.occupied_bins(), 1u);
  EXPECT_NEAR(same.mean_correctness, 0.75, 1e-15);
  EXPECT_EQ(sharpness(same), 0.0);
}

TEST(CalibrationError, Conventions) {
  const BinStats st = bin_stats(samples({0.1, 0.2, 0.3, 0.9}, {0, 1, 0, 1}), fixed_binning(2));
  // bin0: 3 samples, conf 0.2, acc 1/3; bin1: 1 sample, conf 0.9, acc 1.
  const double g0 = 1.0 / 3.0 - 0.2;
  const double g1 = 0.1;
  EXPECT_NEAR(calibration_error(st, Norm::l1, Weighting::by_count), 0.75 * g0 + 0.25 * g1, 1e-15);
  EXPECT_NEAR(calibration_error(st, Norm::l1, Weighting::uniform), 0.5 * (g0 + g1), 1e-15);
  EXPECT_NEAR(calibration_error(st, Norm::l2, Weighting::by_count),
              std::sqrt(0.75 * g0 * g0 + 0.25 * g1 * g1), 1e-15);
  EXPECT_NEAR(calibration_error(st, Norm::l2, Weighting::uniform),
              std::sqrt(0.5 * (g0 * g0 + g1 * g1)), 1e-15);
}

TEST(CalibrationError, PerfectAndWorstCase) {
  const BinStats perfect = bin_stats(samples({0.5, 0.5, 1.0, 1.0}, {1, 0, 1, 1}), fixed_binning(4));
  for (Norm n : {Norm::l1, Norm::l2}) {
    for (Weighting w : {Weighting::by_count, Weighting::uniform}) {
      EXPECT_NEAR(calibration_error(perfect, n, w), 0.0, 1e-15);
    }
  }
  const BinStats worst = bin_stats(samples({1.0, 1.0, 1.0}, {0, 0, 0}), fixed_binning(15));
  EXPECT_EQ(calibration_error(worst, Norm::l1, Weighting::by_count), 1.0);
  EXPECT_EQ(calibration_error(worst, Norm::l2, Weighting::uniform), 1.0);
}

TEST(CalibrationError, NeedsOccupiedBins) {
  BinStats empty;
  empty.bins.resize(3);
  EXPECT_THROW(calibration_error(empty, Norm::l1, Weighting::by_count), DomainError);
  EXPECT_THROW(sharpness(empty), DomainError);
  EXPECT_THROW(bin_stats(Dataset{}, MeasureId::max, fixed_binning(2)), ValidationError);
}

TEST(Decompose, MarginalPredictor) {
  // Constant confidence equal to the global accuracy (0.6).
  const auto s = samples(std::vector<double>(10, 0.6), {1, 1, 1, 0, 0, 1, 1, 0, 1, 0});
  const Decomposition d = decompose(s, fixed_binning(15));
  EXPECT_NEAR(d.calibration_l2, 0.0, 1e-15);
  EXPECT_EQ(d.sharpness, 0.0);
  EXPECT_NEAR(d.variance_term, 0.24, 1e-15);
  EXPECT_NEAR(d.l2_loss, 0.24, 1e-15);
}

TEST(Decompose, PerfectPredictor) {
  const std::vector<std::uint8_t> ok{1, 0, 0, 1, 1, 1, 0, 1};
  std::vector<double> conf(ok.begin(), ok.end());
  const Decomposition d = decompose(samples(conf, ok), fixed_binning(2));
  EXPECT_EQ(d.l2_loss, 0.0);
  EXPECT_EQ(d.calibration_l2, 0.0);
  EXPECT_NEAR(d.sharpness, d.variance_term, 1e-15);
  EXPECT_NEAR(d.variance_term, 0.625 * 0.375, 1e-15);
}

TEST(Decompose, IdentityOnSeededData) {
  const Dataset d = random_dataset(20, 20, 3);
  for (MeasureId m : kAllMeasures) {
    const auto s = score(d, m);
    for (const Binning& b : {fixed_binning(5), adaptive_binning(s.confidence, 5)}) {
      const Decomposition dec = decompose(d, m, b);
      EXPECT_NEAR(dec.l2_loss, dec.reconstructed_loss(), 1e-12);
      EXPECT_GE(dec.sharpness, 0.0);
      EXPECT_GE(dec.calibration_l2, 0.0);
    }
  }
}

TEST(Metrics, MatchNaiveReference) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t k = std::vector<std::size_t>{2, 3, 5, 10}[trial % 4];
    const Dataset d = random_dataset(1000 + trial, 1 + rng() % 200, k, 1.0 + trial % 3);
    for (MeasureId m : kAllMeasures) {
      const auto s = score(d, m);
      for (const Binning& b : {fixed_binning(1 + trial % 15), adaptive_binning(s.confidence, 15)}) {
        const reference::Result ref = reference::metrics(d, m, b);
        const BinStats st = bin_stats(d, m, b);
        for (std::size_t i = 0; i < st.bins.size(); ++i) {
          ASSERT_EQ(st.bins[i].count, ref.counts[i]);
          EXPECT_NEAR(st.bins[i].mean_confidence, ref.mean_confidence[i], 1e-12);
          EXPECT_NEAR(st.bins[i].mean_correctness, ref.mean_correctness[i], 1e-12);
        }
        EXPECT_NEAR(calibration_error(st, Norm::l1, Weighting::by_count), ref.ece_l1, 1e-12);
        EXPECT_NEAR(calibration_error(st, Norm::l2, Weighting::by_count), ref.ece_l2, 1e-12);
        EXPECT_NEAR(calibration_error(st, Norm::l1, Weighting::uniform), ref.ace_l1, 1e-12);
        EXPECT_NEAR(calibration_error(st, Norm::l2, Weighting::uniform), ref.ace_l2, 1e-12);
        EXPECT_NEAR(sharpness(st), ref.sharpness, 1e-12);
        const Decomposition dec = decompose(d, m, b);
        EXPECT_NEAR(dec.l2_loss, ref.l2_loss, 1e-12);
        EXPECT_NEAR(dec.variance_term, ref.variance_term, 1e-12);
        EXPECT_NEAR(dec.calibration_l2, ref.calibration_l2, 1e-12);
      }
    }
  }
}

TEST(Metrics, EceInvariantToRecordOrder) {
  const Dataset d = random_dataset(7, 150, 4);
  std::vector<PredictionRecord> shuffled = d.records();
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const Dataset p(shuffled);
  for (MeasureId m : kAllMeasures) {
    const double a = calibration_error(bin_stats(d, m, fixed_binning(10)), Norm::l1, Weighting::by_count);
    const double b = calibration_error(bin_stats(p, m, fixed_binning(10)), Norm::l1, Weighting::by_count);
    EXPECT_NEAR(a, b, 1e-12);
  }
}

TEST(Metrics, DuplicatingRecordsChangesNothing) {
  const Dataset d = random_dataset(8, 90, 3);
  std::vector<PredictionRecord> twice = d.records();
  twice.insert(twice.end(), d.records().begin(), d.records().end());
  const Dataset dd(twice);
  for (MeasureId m : kAllMeasures) {
    const auto s1 = score(d, m);
    const auto s2 = score(dd, m);
    const Binning b1 = adaptive_binning(s1.confidence, 6);
    const Binning b2 = adaptive_binning(s2.confidence, 6);
    EXPECT_EQ(b1, b2);
    for (const Binning& b : {b1, fixed_binning(8)}) {
      const BinStats x = bin_stats(s1, b);
      const BinStats y = bin_stats(s2, b);
      for (Norm n : {Norm::l1, Norm::l2}) {
        for (Weighting w : {Weighting::by_count, Weighting::uniform}) {
          EXPECT_NEAR(calibration_error(x, n, w), calibration_error(y, n, w), 1e-12);
        }
      }
      EXPECT_NEAR(sharpness(x), sharpness(y), 1e-12);
      const Decomposition dx = decompose(s1, b);
      const Decomposition dy = decompose(s2, b);
      EXPECT_NEAR(dx.l2_loss, dy.l2_loss, 1e-12);
      EXPECT_NEAR(dx.calibration_l2, dy.calibration_l2, 1e-12);
    }
  }
}

TEST(Metrics, AceEqualsEceWhenAdaptiveCountsAreEqual) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> conf(120);
  std::vector<std::uint8_t> ok(120);
  for (std::size_t i = 0; i < conf.size(); ++i) {
    conf[i] = u(rng);
    ok[i] = u(rng) < conf[i] ? 1 : 0;
  }
  const Binning b = adaptive_binning(conf, 12);
  const BinStats st = bin_stats(conf, ok, b);
  for (const Bin& bin : st.bins) ASSERT_EQ(bin.count, 10u);
  EXPECT_NEAR(calibration_error(st, Norm::l1, Weighting::uniform),
              calibration_error(st, Norm::l1, Weighting::by_count), 1e-15);
}

TEST(Metrics, Accuracy) {
  EXPECT_NEAR(accuracy(binary_dataset({0.9, 0.6, 0.7, 0.8}, {1, 0, 1, 1})), 0.75, 1e-15);
  EXPECT_THROW(accuracy(Dataset{}), ValidationError);
}

}  // namespace
