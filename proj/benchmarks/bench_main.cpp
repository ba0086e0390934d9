#include "puprior/classifier.hpp"
#include "puprior/cluster.hpp"
#include "puprior/dataset.hpp"
#include "puprior/density.hpp"
#include "puprior/pulscar.hpp"
#include "puprior/rng.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <vector>

using namespace puprior;

namespace {

// Right-skewed scores, roughly what a classifier gives the unlabeled.
std::vector<double> skewed_scores(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> p(n);
  for (double& x : p) x = std::pow(rng.uniform(), 3.0);
  return clip_probabilities(p);
}

void BM_BetaKernelDensity(benchmark::State& state) {
  const auto p = skewed_scores(static_cast<std::size_t>(state.range(0)), 1);
  const BetaKernelEstimator kde(p);
  for (auto _ : state) benchmark::DoNotOptimize(kde.density(0.05, 64));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BetaKernelDensity)->Arg(1000)->Arg(8000)->Arg(32000);

void BM_BandwidthSearch(benchmark::State& state) {
  const auto p = skewed_scores(static_cast<std::size_t>(state.range(0)), 2);
  const auto bins = bin_count(p.size(), BinRule::kFd, p);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_bandwidth(p, bins));
}
BENCHMARK(BM_BandwidthSearch)->Arg(1000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_ErrorCurve(benchmark::State& state) {
  const auto bins = static_cast<std::size_t>(state.range(0));
  DensityEstimate du, dp;
  du.bin_centers = dp.bin_centers = bin_centers(bins);
  for (std::size_t i = 0; i < bins; ++i) {
    const double z = du.bin_centers[i];
    dp.values.push_back(6 * z * z);
    du.values.push_back(0.2 * dp.values.back() + 0.8 * 3 * (1 - z) * (1 - z));
  }
  for (auto _ : state) benchmark::DoNotOptimize(estimate_alpha_from_densities(du, dp));
}
BENCHMARK(BM_ErrorCurve)->Arg(16)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_TreeEnsembleFit(benchmark::State& state) {
  SyntheticConfig c;
  c.n_positive = static_cast<std::size_t>(state.range(0)) / 4;
  c.n_unlabeled = static_cast<std::size_t>(state.range(0)) - c.n_positive;
  c.alpha_true = 0.2;
  const auto ds = generate_scar(c);
  ClassifierConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(fit(ds.features, ds.pu_label, cfg));
}
BENCHMARK(BM_TreeEnsembleFit)->Arg(2000)->Arg(8000)->Unit(benchmark::kMillisecond);

void BM_GmmFit(benchmark::State& state) {
  const auto d = static_cast<Eigen::Index>(state.range(0));
  Rng rng(3);
  Matrix x(1500, d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.normal() + 6.0 * static_cast<double>(i % 3);
  }
  for (auto _ : state) benchmark::DoNotOptimize(gmm_fit(x, 3));
}
BENCHMARK(BM_GmmFit)->Arg(2)->Arg(10)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_SelectClusterCount(benchmark::State& state) {
  Rng rng(4);
  Matrix x(2000, 10);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = rng.normal() + 5.0 * static_cast<double>(i % 4);
  }
  for (auto _ : state) benchmark::DoNotOptimize(select_cluster_count(x, 10));
}
BENCHMARK(BM_SelectClusterCount)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
