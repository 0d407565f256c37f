#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "confcal/measures.hpp"

namespace {

using namespace confcal;

// Frozen from an independent numpy computation of 1 - H(v)/log(10).
constexpr double kEntropyFootnoteX1 = 0.8588182585;
constexpr double kEntropyFootnoteX2 = 0.7633940076;

ProbVector footnote_x1() {
  std::vector<double> v(10, 0.0);
  v[0] = 0.9;
  v[1] = 0.1;
  return ProbVector(v);
}

ProbVector footnote_x2() {
  std::vector<double> v(10, 0.1 / 9.0);
  v[0] = 0.9;
  return ProbVector(v);
}

ProbVector random_prob(std::mt19937_64& rng, std::size_t k) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> v(k);
  for (double& x : v) x = e(rng);
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (double& x : v) x /= s;
  return ProbVector(v);
}

TEST(Measures, MaxExamples) {
  EXPECT_DOUBLE_EQ(confidence_max(footnote_x1()), 0.9);
  EXPECT_NEAR(confidence_max(ProbVector::uniform(5)), 0.2, 1e-15);
  EXPECT_EQ(confidence_max(ProbVector::one_hot(4, 2)), 1.0);
}

TEST(Measures, Margin2Examples) {
  EXPECT_NEAR(confidence_margin2(footnote_x1()), 0.8, 1e-15);
  for (std::size_t k : {2u, 3u, 7u}) EXPECT_NEAR(confidence_margin2(ProbVector::uniform(k)), 0.0, 1e-15);
  EXPECT_NEAR(confidence_margin2(ProbVector({0.5, 0.3, 0.2})), 0.2, 1e-15);
}

TEST(Measures, Margin3Examples) {
  EXPECT_NEAR(confidence_margin3(footnote_x1()), 0.85, 1e-15);
  EXPECT_NEAR(confidence_margin3(ProbVector::uniform(3)), 0.0, 1e-15);
  EXPECT_NEAR(confidence_margin3(ProbVector({0.5, 0.3, 0.2})), 0.25, 1e-15);
}

TEST(Measures, Margin3BinaryTreatsMissingThirdAsZero) {
  EXPECT_NEAR(confidence_margin3(ProbVector({0.7, 0.3})), 0.7 - 0.15, 1e-15);
  EXPECT_NEAR(confidence_margin3(ProbVector::uniform(2)), 0.25, 1e-15);
}

TEST(Measures, EntropyExamples) {
  EXPECT_EQ(confidence_entropy(ProbVector::one_hot(6, 0)), 1.0);
  EXPECT_NEAR(confidence_entropy(ProbVector::uniform(6)), 0.0, 1e-12);
  EXPECT_NEAR(confidence_entropy(footnote_x1()), kEntropyFootnoteX1, 1e-9);
  EXPECT_NEAR(confidence_entropy(footnote_x2()), kEntropyFootnoteX2, 1e-9);
  EXPECT_GT(confidence_entropy(footnote_x1()), confidence_entropy(footnote_x2()));
}

TEST(Measures, InvalidVectorsRejected) {
  EXPECT_THROW(ProbVector({1.0}), ValidationError);
  EXPECT_THROW(ProbVector({0.6, 0.6}), ValidationError);
  EXPECT_THROW(ProbVector({1.1, -0.1}), ValidationError);
  EXPECT_THROW(ProbVector({NAN, 1.0}), ValidationError);
  EXPECT_NO_THROW(ProbVector({0.5, 0.5 + 5e-7}));
  EXPECT_THROW(LogitVector({1.0, INFINITY}), ValidationError);
  EXPECT_THROW(LogitVector({1.0}), ValidationError);
}

TEST(Measures, ParseNames) {
  for (MeasureId m : kAllMeasures) EXPECT_EQ(parse_measure(to_string(m)), m);
  EXPECT_THROW(parse_measure("kurtosis"), ValidationError);
}

TEST(Measures, RangeAndPermutationInvariance) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t k = 2 + trial % 9;
    const ProbVector v = random_prob(rng, k);
    std::vector<double> perm(v.entries().begin(), v.entries().end());
    std::shuffle(perm.begin(), perm.end(), rng);
    const ProbVector pv(perm);
    for (MeasureId m : kAllMeasures) {
      const double c = confidence(m, v);
      EXPECT_GE(c, 0.0);
      EXPECT_LE(c, 1.0);
      EXPECT_NEAR(c, confidence(m, pv), 1e-12) << to_string(m);
    }
  }
}

TEST(Measures, MinimumAtCenterMaximumAtVertices) {
  std::mt19937_64 rng(5);
  for (std::size_t k : {2u, 3u, 5u, 10u}) {
    const ProbVector center = ProbVector::uniform(k);
    for (MeasureId m : kAllMeasures) {
      const double lo = confidence(m, center);
      // margin3 with k = 2 treats the missing third entry as zero.
      double expected = m == MeasureId::max ? 1.0 / k : 0.0;
      if (m == MeasureId::margin3 && k == 2) expected = 0.25;
      EXPECT_NEAR(lo, expected, 1e-12);
      for (std::size_t i = 0; i < k; ++i) EXPECT_EQ(confidence(m, ProbVector::one_hot(k, i)), 1.0);
      for (int t = 0; t < 200; ++t) {
        const ProbVector v = random_prob(rng, k);
        const double c = confidence(m, v);
        EXPECT_GE(c, lo - 1e-12);
        EXPECT_LT(c, 1.0);
      }
    }
  }
}

TEST(Measures, BinaryMeasuresAreIncreasingInTopEntry) {
  std::vector<double> tops;
  for (int i = 0; i <= 100; ++i) tops.push_back(0.5 + 0.005 * i);
  for (MeasureId m : kAllMeasures) {
    double prev = -1.0;
    for (double t : tops) {
      const double c = confidence(m, ProbVector({1.0 - t, t}));
      EXPECT_GT(c, prev) << to_string(m) << " at " << t;
      prev = c;
    }
  }
}

TEST(Softmax, Examples) {
  const ProbVector a = softmax_temperature(LogitVector({0.0, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(a[0], 0.5);
  EXPECT_DOUBLE_EQ(a[1], 0.5);

  const ProbVector b = softmax_temperature(LogitVector({std::log(2.0), 0.0}), 0.5);
  EXPECT_NEAR(b[0], 0.8, 1e-15);
  EXPECT_NEAR(b[1], 0.2, 1e-15);

  const ProbVector c = softmax_temperature(LogitVector({3.0, 0.0, 0.0}), 1000.0);
  for (double x : c.entries()) EXPECT_NEAR(x, 1.0 / 3.0, 1e-3);
}

TEST(Softmax, StableForLargeLogits) {
  const ProbVector p = softmax_temperature(LogitVector({1000.0, 999.0, -1000.0}), 1.0);
  EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
  EXPECT_EQ(p[2], 0.0);
}

TEST(Softmax, RejectsNonPositiveTemperature) {
  const LogitVector z({1.0, 2.0});
  EXPECT_THROW(softmax_temperature(z, 0.0), DomainError);
  EXPECT_THROW(softmax_temperature(z, -1.0), DomainError);
  EXPECT_THROW(softmax_temperature(z, NAN), DomainError);
}

TEST(Softmax, EntropyNonDecreasingAndArgmaxFixedInTemperature) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> z(2 + trial % 6);
    for (double& x : z) x = g(rng);
    const LogitVector lz(z);
    const auto arg = std::max_element(z.begin(), z.end()) - z.begin();
    double prev_conf = 2.0;
    for (double t = 0.1; t <= 10.0; t *= 1.1) {
      const ProbVector p = softmax_temperature(lz, t);
      const auto pe = p.entries();
      EXPECT_EQ(std::max_element(pe.begin(), pe.end()) - pe.begin(), arg);
      const double c = confidence_entropy(p);
      EXPECT_LE(c, prev_conf + 1e-12);
      prev_conf = c;
    }
  }
}

TEST(ProbsToLogits, RoundTrips) {
  const ProbVector half({0.5, 0.5});
  const LogitVector z = probs_to_logits(half, 1e-12);
  EXPECT_DOUBLE_EQ(z[0], std::log(0.5));
  EXPECT_DOUBLE_EQ(z[1], std::log(0.5));
  EXPECT_EQ(softmax_temperature(z, 1.0), half);

  const ProbVector hot = ProbVector::one_hot(4, 1);
  const ProbVector back = softmax_temperature(probs_to_logits(hot, 1e-12), 1.0);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(back[i], hot[i], 1e-9);

  const ProbVector v({0.7, 0.2, 0.1});
  const ProbVector rt = softmax_temperature(probs_to_logits(v, 1e-12), 1.0);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(rt[i], v[i], 1e-12);

  EXPECT_THROW(probs_to_logits(v, 0.0), DomainError);
}

}  // namespace
