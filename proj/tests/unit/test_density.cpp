#include "fixtures.hpp"
#include "oracles.hpp"
#include "puprior/density.hpp"
#include "puprior/rng.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace puprior;

TEST(BinCount, SimpleRules) {
  EXPECT_EQ(bin_count(100, BinRule::kSqrt), 10u);
  EXPECT_EQ(bin_count(100, BinRule::kSturges), 8u);
  EXPECT_EQ(bin_count(1000, BinRule::kRice), 20u);
}

TEST(BinCount, DataDrivenRulesStayWithinBounds) {
  const auto u = fixture::uniform_samples(1000, 1);
  for (auto rule : {BinRule::kScott, BinRule::kFd}) {
    const auto n = bin_count(u.size(), rule, u);
    EXPECT_GE(n, 2u);
    EXPECT_LE(n, bin_count(u.size(), BinRule::kRice));
  }
  // Scores piled up near 0 would ask for a huge FD count; it is capped.
  std::vector<double> crowded(5000, 1e-5);
  for (std::size_t i = 0; i < 100; ++i) crowded[i] = 0.5 + 0.004 * static_cast<double>(i);
  for (std::size_t i = 100; i < 5000; ++i) crowded[i] += 1e-9 * static_cast<double>(i);
  EXPECT_EQ(bin_count(crowded.size(), BinRule::kFd, crowded),
            bin_count(crowded.size(), BinRule::kRice));
  // Zero IQR falls back to sqrt.
  const std::vector<double> flat(100, 0.3);
  EXPECT_EQ(bin_count(100, BinRule::kFd, flat), 10u);
}

TEST(BinCount, ParsesNames) {
  EXPECT_EQ(parse_bin_rule("fd"), BinRule::kFd);
  EXPECT_EQ(to_string(BinRule::kSturges), "sturges");
  EXPECT_THROW(parse_bin_rule("auto"), InputError);
}

TEST(Histogram, TwoPointsTwoBins) {
  const std::vector<double> p{0.25, 0.75};
  const auto h = histogram_density(p, 2);
  EXPECT_EQ(h.values, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(h.bin_centers, (std::vector<double>{0.25, 0.75}));
}

TEST(Histogram, SingleBinHoldsAllMass) {
  const std::vector<double> p(7, 0.33);
  const auto h = histogram_density(p, 10);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_DOUBLE_EQ(h.values[i], i == 3 ? 10.0 : 0.0);
}

TEST(Histogram, EvenlySpacedUniformIsFlat) {
  std::vector<double> u(10000);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (static_cast<double>(i) + 0.5) / 1e4;
  u.back() = 1.0;
  const auto h = histogram_density(u, 100);
  for (double v : h.values) EXPECT_NEAR(v, 1.0, 0.15);
}

// With i.i.d. draws a bin count of 100 has a standard deviation near 10, so
// per-bin density wanders by about 0.1; five of those is the bound here.
TEST(Histogram, RandomUniformStaysWithinFiveSigma) {
  const auto u = fixture::uniform_samples(10000, 2);
  const auto h = histogram_density(u, 100);
  double mass = 0.0;
  for (double v : h.values) {
    EXPECT_NEAR(v, 1.0, 0.5);
    mass += v / 100.0;
  }
  EXPECT_NEAR(mass, 1.0, 1e-12);
}

TEST(Histogram, MassIsOne) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const std::size_t n = 1 + rng.below(500);
    const std::size_t bins = 2 + rng.below(200);
    std::vector<double> p(n);
    for (double& x : p) x = rng.uniform() * rng.uniform();
    if (seed % 3 == 0) p[0] = 1.0;
    const auto h = histogram_density(p, bins);
    double mass = 0;
    for (double v : h.values) mass += v / static_cast<double>(bins);
    EXPECT_NEAR(mass, 1.0, 1e-9);
  }
  EXPECT_THROW(histogram_density(std::vector<double>{}, 10), InputError);
}

TEST(BetaKernel, MatchesTheDefinition) {
  const std::vector<double> p{0.2, 0.35, 0.9};
  const BetaKernelEstimator est(p);
  for (double bw : {0.001, 0.01, 0.2, 0.5}) {
    for (double z : {0.05, 0.5, 0.93}) {
      double expected = 0;
      for (double x : p) expected += oracle::beta_pdf(x, 1 + z / bw, 1 + (1 - z) / bw);
      expected /= 3.0;
      EXPECT_NEAR(est.evaluate(z, bw), expected, 1e-9 * std::max(1.0, expected)) << z << " " << bw;
    }
  }
}

TEST(BetaKernel, HalfBandwidthAtCenterIsSixXOneMinusX) {
  for (double x : {0.1, 0.5, 0.7}) {
    const std::vector<double> p{x};
    EXPECT_NEAR(BetaKernelEstimator(p).evaluate(0.5, 0.5), 6 * x * (1 - x), 1e-12);
  }
}

TEST(BetaKernel, SymmetricForCentralSample) {
  const std::vector<double> p{0.5};
  for (double bw : {0.01, 0.1, 0.4}) {
    const auto d = beta_kernel_density(p, bw, 20);
    for (std::size_t i = 0; i < 20; ++i) EXPECT_NEAR(d.values[i], d.values[19 - i], 1e-10);
  }
}

TEST(BetaKernel, MirroredSamplesMirrorTheArgmax) {
  const std::vector<double> low(30, 0.1), high(30, 0.9);
  const auto a = beta_kernel_density(low, 0.05, 25);
  const auto b = beta_kernel_density(high, 0.05, 25);
  const auto ia = std::max_element(a.values.begin(), a.values.end()) - a.values.begin();
  const auto ib = std::max_element(b.values.begin(), b.values.end()) - b.values.begin();
  EXPECT_EQ(ia, 24 - ib);
}

TEST(BetaKernel, RejectsBandwidthOutOfBounds) {
  const std::vector<double> p{0.3, 0.4};
  EXPECT_THROW(beta_kernel_density(p, 0.0001, 10), InputError);
  EXPECT_THROW(beta_kernel_density(p, 0.6, 10), InputError);
}

TEST(BetaKernel, NonNegativeEverywhere) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> p(1 + rng.below(50));
    for (double& x : p) x = std::pow(rng.uniform(), 1 + 4 * rng.uniform());
    const double bw = kMinBandwidth + (kMaxBandwidth - kMinBandwidth) * rng.uniform();
    for (double v : beta_kernel_density(clip_probabilities(p), bw, 64).values) {
      EXPECT_GE(v, 0.0);
      EXPECT_TRUE(std::isfinite(v));
    }
  }
}

TEST(Bandwidth, WithinBoundsAndBeatsGrid) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    std::vector<double> p(300);
    for (double& x : p) x = fixture::beta_integer_shapes(rng, 2, 5);
    const std::size_t bins = bin_count(p.size(), BinRule::kFd, p);
    BandwidthConfig cfg;
    cfg.optimizer.seed = seed;
    const auto bw = estimate_bandwidth(p, bins, cfg);
    EXPECT_GE(bw.value, kMinBandwidth);
    EXPECT_LE(bw.value, kMaxBandwidth);
    const BetaKernelEstimator est(p);
    const auto hist = histogram_density(p, bins);
    for (int i = 0; i < 100; ++i) {
      const double candidate = kMinBandwidth + (kMaxBandwidth - kMinBandwidth) * i / 99.0;
      EXPECT_LE(bw.loss, bandwidth_objective(est, hist, candidate, cfg.objective) + 1e-12);
    }
  }
}

TEST(Bandwidth, BimodalPicksNarrowKernel) {
  Rng rng(3);
  std::vector<double> p(400);
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::clamp((i % 2 ? 0.15 : 0.85) + 0.03 * rng.normal(), 0.0, 1.0);
  }
  const auto bw = estimate_bandwidth(p, 20);
  EXPECT_LT(bw.value, 0.5);
}

TEST(Bandwidth, ConstantInputIsDegenerate) {
  const std::vector<double> p(50, 0.4);
  const auto bw = estimate_bandwidth(p, 10);
  EXPECT_TRUE(bw.degenerate);
  EXPECT_EQ(bw.value, kMinBandwidth);
  EXPECT_THROW(estimate_bandwidth(std::vector<double>(5, 0.3), 10), InputError);
}

TEST(Bandwidth, JensenShannonObjectiveIsAvailable) {
  const auto u = fixture::uniform_samples(200, 9);
  BandwidthConfig cfg;
  cfg.objective = BandwidthObjective::kJensenShannon;
  const auto bw = estimate_bandwidth(u, 14, cfg);
  EXPECT_GE(bw.value, kMinBandwidth);
  EXPECT_LE(bw.value, kMaxBandwidth);
  EXPECT_GE(bw.loss, 0.0);
  EXPECT_EQ(parse_bandwidth_objective("js"), BandwidthObjective::kJensenShannon);
}

TEST(Bandwidth, KernelBeatsHistogramOnBetaTwoFive) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(100 + seed);
    std::vector<double> p(2000);
    for (double& x : p) x = fixture::beta_integer_shapes(rng, 2, 5);
    const std::size_t bins = bin_count(p.size(), BinRule::kFd, p);
    BandwidthConfig cfg;
    cfg.optimizer.seed = seed;
    const auto bw = estimate_bandwidth(p, bins, cfg);
    const auto kde = beta_kernel_density(p, bw.value, bins);
    const auto hist = histogram_density(p, bins);
    double mse_kde = 0, mse_hist = 0;
    for (std::size_t i = 0; i < bins; ++i) {
      const double truth = oracle::beta_pdf(kde.bin_centers[i], 2, 5);
      mse_kde += (kde.values[i] - truth) * (kde.values[i] - truth);
      mse_hist += (hist.values[i] - truth) * (hist.values[i] - truth);
    }
    wins += mse_kde < mse_hist ? 1 : 0;
  }
  EXPECT_GE(wins, 8);
}

TEST(Density, TrapezoidMassOfFlatDensity) {
  DensityEstimate d;
  d.bin_centers = bin_centers(10);
  d.values.assign(10, 1.0);
  EXPECT_NEAR(trapezoid_mass(d), 1.0, 1e-12);
  EXPECT_NEAR(bin_centers(4)[1], 0.375, 1e-15);
}
