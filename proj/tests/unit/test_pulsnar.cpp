#include "fixtures.hpp"
#include "puprior/pulsnar.hpp"
#include "puprior/rng.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace puprior;

namespace {

EstimatorConfig light() {
  EstimatorConfig c;
  c.classifier.n_trees = 40;
  c.classifier.max_depth = 4;
  c.k_max = 8;
  c.pulscar.grid_step = 1e-3;
  return c;
}

PUDataset small_snar(double alpha, std::uint64_t seed) {
  SyntheticConfig c;
  c.n_positive = 500;
  c.n_unlabeled = 1500;
  c.n_features = 8;
  c.n_subclasses = 2;
  c.subclass_mix = {0.2, 0.8};
  c.alpha_true = alpha;
  c.class_sep = 2.0;
  c.seed = seed;
  return generate_snar(c);
}

}  // namespace

TEST(Summarize, ClosedForm) {
  const std::vector<double> v{0.1, 0.2};
  const auto s = summarize(v);
  EXPECT_NEAR(s.mean, 0.15, 1e-15);
  EXPECT_NEAR(s.standard_error, 0.05, 1e-15);
  EXPECT_NEAR(s.ci_low, 0.052, 1e-12);
  EXPECT_NEAR(s.ci_high, 0.248, 1e-12);
}

TEST(Summarize, ConstantEstimatesHaveZeroWidth) {
  const std::vector<double> v(5, 0.3);
  const auto s = summarize(v);
  EXPECT_EQ(s.ci_low, s.ci_high);
  EXPECT_THROW(summarize(std::vector<double>{0.1}), InputError);
}

TEST(Pulsnar, TotalIsSumOfClusterAlphas) {
  const auto d = small_snar(0.2, 1);
  const auto est = estimate_alpha_snar(d, light(), 1);
  double sum = 0;
  for (const auto& c : est.per_cluster) sum += c.estimate.alpha;
  EXPECT_EQ(est.alpha_sum, sum);
  EXPECT_EQ(est.alpha_total, std::min(sum, 1.0));
  EXPECT_EQ(est.clipped, sum > 1.0);
  EXPECT_EQ(est.cluster_count, est.per_cluster.size());
}

TEST(Pulsnar, EverySubproblemSeesAllUnlabeled) {
  const auto d = small_snar(0.2, 2);
  const auto est = estimate_alpha_snar(d, light(), 2);
  const std::size_t n_unl = d.n_unlabeled();
  std::size_t positives = 0;
  for (const auto& c : est.per_cluster) {
    EXPECT_EQ(c.probs_unlabeled.size(), n_unl);
    positives += c.positive_rows.size();
    for (auto r : c.positive_rows) EXPECT_EQ(d.pu_label[r], 1);
  }
  EXPECT_EQ(positives, d.n_labeled());
}

TEST(Pulsnar, SingleClusterEqualsPulscar) {
  const auto d = fixture::small_scar(0.15, 3, 400, 1200, 8, 1.5);
  auto cfg = light();
  cfg.n_clusters = 1;
  const auto snar = estimate_alpha_snar(d, cfg, 3);
  const auto scar = estimate_alpha_pulscar(d, cfg, 3);
  ASSERT_EQ(snar.cluster_count, 1u);
  EXPECT_EQ(snar.alpha_total, scar.estimate.alpha);
  EXPECT_EQ(snar.per_cluster[0].probs_unlabeled, scar.probs_unlabeled);
}

TEST(Pulsnar, UnlabeledOrderDoesNotMatter) {
  const auto d = small_snar(0.2, 4);
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  // Reverse the unlabeled rows only, keeping labeled rows in place.
  auto unl = d.unlabeled_indices();
  std::vector<std::size_t> reversed(unl.rbegin(), unl.rend());
  for (std::size_t i = 0; i < unl.size(); ++i) order[unl[i]] = reversed[i];
  const auto permuted = d.subset(order);
  const auto a = estimate_alpha_snar(d, light(), 4);
  const auto b = estimate_alpha_snar(permuted, light(), 4);
  ASSERT_EQ(a.per_cluster.size(), b.per_cluster.size());
  for (std::size_t c = 0; c < a.per_cluster.size(); ++c) {
    EXPECT_EQ(a.per_cluster[c].estimate.alpha, b.per_cluster[c].estimate.alpha) << c;
  }
}

TEST(Pulsnar, DeterministicAndJobIndependent) {
  const auto d = small_snar(0.3, 5);
  auto cfg = light();
  const auto a = estimate_alpha_snar(d, cfg, 5);
  cfg.jobs = 3;
  const auto b = estimate_alpha_snar(d, cfg, 5);
  EXPECT_EQ(a.alpha_total, b.alpha_total);
  EXPECT_EQ(a.selection.bic, b.selection.bic);
}

TEST(RunRepeated, FailuresAreRecordedAndExcluded) {
  auto source = [](std::uint64_t seed) {
    if (seed == 1) throw InputError("broken seed");
    return fixture::small_scar(0.1, seed, 200, 600, 6, 2.0);
  };
  const auto s = run_repeated(source, 3, LabelMode::kScar, light(), 0);
  EXPECT_EQ(s.n_failed, 1u);
  EXPECT_EQ(s.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_FALSE(s.estimates[1].has_value());
  ASSERT_TRUE(s.estimates[0] && s.estimates[2]);
  EXPECT_NEAR(s.mean, (*s.estimates[0] + *s.estimates[2]) / 2.0, 1e-15);
  EXPECT_EQ(s.failures.size(), 1u);
}

TEST(RunRepeated, ParallelMatchesSerial) {
  auto source = [](std::uint64_t seed) { return fixture::small_scar(0.1, seed, 150, 450, 5); };
  const auto a = run_repeated(source, 3, LabelMode::kScar, light(), 10, 1);
  const auto b = run_repeated(source, 3, LabelMode::kScar, light(), 10, 3);
  EXPECT_EQ(a.estimates, b.estimates);
  EXPECT_EQ(a.mean, b.mean);
}
