#include "fixtures.hpp"
#include "puprior/improve.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <numeric>

using namespace puprior;

namespace {

ImprovementConfig light() {
  ImprovementConfig c;
  c.estimator.classifier.n_trees = 40;
  c.estimator.classifier.max_depth = 4;
  c.estimator.k_max = 6;
  c.estimator.pulscar.grid_step = 1e-3;
  return c;
}

int sum(const Labels& l) { return std::accumulate(l.begin(), l.end(), 0); }

}  // namespace

TEST(FlipTopAlpha, Extremes) {
  const std::vector<double> p{0.3, 0.7, 0.1};
  EXPECT_EQ(sum(flip_top_alpha(p, 0.0)), 0);
  EXPECT_EQ(sum(flip_top_alpha(p, 1.0)), 3);
  EXPECT_THROW(flip_top_alpha(p, 1.2), InputError);
}

TEST(FlipTopAlpha, TiesGoToTheLowerIndex) {
  const std::vector<double> p{0.9, 0.8, 0.8, 0.1};
  EXPECT_EQ(flip_top_alpha(p, 0.5), (Labels{1, 1, 0, 0}));
}

TEST(FlipTopAlpha, ExactCountAndIdempotent) {
  const auto p = fixture::uniform_samples(333, 5);
  for (double a : {0.01, 0.1, 0.37, 0.5, 0.99}) {
    const auto first = flip_top_alpha(p, a);
    EXPECT_EQ(static_cast<std::size_t>(sum(first)), round_count(a * 333.0));
    // Feeding the labels back as scores keeps the same set.
    std::vector<double> as_scores(first.begin(), first.end());
    EXPECT_EQ(flip_top_alpha(as_scores, a), first);
  }
}

TEST(Improvement, NoContaminationChangesLittle) {
  const auto d = fixture::small_scar(0.0, 8, 300, 900, 8, 2.0);
  const auto r = run_improvement(d, LabelMode::kScar, light(), 8);
  EXPECT_LE(r.alpha, 0.03);
  EXPECT_LE(r.n_flipped, 27u);
  EXPECT_NEAR(*r.with.auc_roc, *r.without.auc_roc, 0.02);
  EXPECT_EQ(r.without.variant, "without");
  EXPECT_EQ(r.with.variant, "with");
}

TEST(Improvement, ContaminatedScarImproves) {
  const auto d = fixture::small_scar(0.3, 9, 400, 1200, 8, 1.5);
  const auto r = run_improvement(d, LabelMode::kScar, light(), 9);
  EXPECT_GT(*r.with.auc_roc, *r.without.auc_roc);
  EXPECT_GT(*r.with.mcc, *r.without.mcc);
  EXPECT_EQ(r.probs_with.size(), d.size());
  EXPECT_EQ(r.n_flipped, round_count(r.alpha * static_cast<double>(d.n_unlabeled())));
}

TEST(Improvement, RequiresTruth) {
  auto d = fixture::small_scar(0.1, 1, 50, 150, 3);
  d.true_label.reset();
  EXPECT_THROW(run_improvement(d, LabelMode::kScar, light(), 1), InputError);
}

TEST(Improvement, PairedCsvHasTwoRowsPerSeed) {
  fixture::TempDir dir("paired");
  const auto d = fixture::small_scar(0.2, 2, 150, 450, 5);
  std::vector<PairedRow> rows{{2, run_improvement(d, LabelMode::kScar, light(), 2)}};
  write_paired_csv(rows, dir / "p.csv", {"x"});
  std::ifstream in(dir / "p.csv");
  std::size_t data = 0;
  std::string header;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("#", 0) == 0) continue;
    if (header.empty()) {
      header = line;
      continue;
    }
    ++data;
  }
  EXPECT_EQ(header, "seed,variant,alpha,accuracy,auc_roc,brier,f1,mcc,average_precision");
  EXPECT_EQ(data, 2u);
}
