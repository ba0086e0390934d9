#include "oracles.hpp"
#include "puprior/metrics.hpp"
#include "puprior/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace puprior;

namespace {

void expect_matches_oracle(const std::vector<double>& p, const std::vector<int>& y) {
  const auto m = classification_metrics(p, y);
  EXPECT_NEAR(m.accuracy, oracle::accuracy(p, y), 1e-12);
  EXPECT_NEAR(m.brier, oracle::brier(p, y), 1e-12);
  EXPECT_NEAR(m.f1, oracle::f1(p, y), 1e-12);
  EXPECT_NEAR(m.average_precision, oracle::average_precision(p, y), 1e-12);
  const auto auc = oracle::auc(p, y);
  ASSERT_EQ(m.auc_roc.has_value(), auc.has_value());
  if (auc) EXPECT_NEAR(*m.auc_roc, *auc, 1e-12);
  const auto mcc = oracle::mcc(p, y);
  ASSERT_EQ(m.mcc.has_value(), mcc.has_value());
  if (mcc) EXPECT_NEAR(*m.mcc, *mcc, 1e-12);
}

}  // namespace

TEST(Metrics, PerfectPredictions) {
  const std::vector<double> p{0, 0, 1, 1, 1};
  const std::vector<int> y{0, 0, 1, 1, 1};
  const auto m = classification_metrics(p, y);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(*m.auc_roc, 1.0);
  EXPECT_EQ(m.brier, 0.0);
  EXPECT_EQ(m.f1, 1.0);
  EXPECT_EQ(*m.mcc, 1.0);
  EXPECT_EQ(m.average_precision, 1.0);
}

TEST(Metrics, ConstantHalf) {
  const std::vector<double> p(6, 0.5);
  const std::vector<int> y{0, 1, 0, 1, 0, 1};
  const auto m = classification_metrics(p, y);
  EXPECT_DOUBLE_EQ(m.brier, 0.25);
  EXPECT_DOUBLE_EQ(*m.auc_roc, 0.5);
}

TEST(Metrics, SingleClassLeavesAucAndMccUndefined) {
  const std::vector<double> p{0.2, 0.9};
  const std::vector<int> y{1, 1};
  const auto m = classification_metrics(p, y);
  EXPECT_FALSE(m.auc_roc);
  EXPECT_FALSE(m.mcc);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.5);
}

TEST(Metrics, EightRowFixture) {
  const std::vector<double> p{0.9, 0.8, 0.7, 0.6, 0.55, 0.4, 0.3, 0.1};
  const std::vector<int> y{1, 1, 0, 1, 0, 0, 1, 0};
  expect_matches_oracle(p, y);
  const auto m = classification_metrics(p, y);
  EXPECT_DOUBLE_EQ(m.accuracy, 0.625);
  EXPECT_DOUBLE_EQ(*m.auc_roc, 0.75);
}

TEST(Metrics, ExhaustiveSmallFixtures) {
  const std::vector<double> levels{0.2, 0.5, 0.8};
  for (std::size_t n = 1; n <= 6; ++n) {
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= levels.size();
    for (unsigned labels = 0; labels < (1u << n); ++labels) {
      for (std::size_t code = 0; code < combos; ++code) {
        std::vector<double> p(n);
        std::vector<int> y(n);
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i) {
          p[i] = levels[c % levels.size()];
          c /= levels.size();
          y[i] = static_cast<int>((labels >> i) & 1u);
        }
        expect_matches_oracle(p, y);
        if (HasFatalFailure()) return;
      }
    }
  }
}

TEST(Metrics, AucInvariantUnderMonotoneTransform) {
  Rng rng(3);
  std::vector<double> p(200), q(200);
  std::vector<int> y(200);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::round(rng.uniform() * 20) / 20;
    y[i] = rng.uniform() < p[i] ? 1 : 0;
    q[i] = std::exp(3 * p[i]) - 7;
  }
  EXPECT_DOUBLE_EQ(*roc_auc(p, y), *roc_auc(q, y));
}

TEST(Metrics, ThresholdIsRespected) {
  const std::vector<double> p{0.3, 0.6};
  const std::vector<int> y{1, 0};
  EXPECT_DOUBLE_EQ(classification_metrics(p, y, 0.5).accuracy, 0.0);
  EXPECT_DOUBLE_EQ(classification_metrics(p, y, 0.2).accuracy, 0.5);
  EXPECT_DOUBLE_EQ(classification_metrics(p, y, 0.7).accuracy, 0.5);
}
