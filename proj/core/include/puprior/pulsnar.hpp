#pragma once

#include "puprior/classifier.hpp"
#include "puprior/cluster.hpp"
#include "puprior/dataset.hpp"
#include "puprior/pulscar.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace puprior {

struct EstimatorConfig {
  /// Tree settings; the seed and positive scale are set per stage.
  ClassifierConfig classifier{};
  PulscarConfig pulscar{};
  GmmConfig gmm{};
  std::size_t k_max = 25;
  std::size_t min_cluster_size = 10;
  /// Use this many clusters instead of selecting by BIC.
  std::optional<std::size_t> n_clusters;
  /// Worker threads for cluster-count fits and per-cluster sub-problems.
  std::size_t jobs = 1;
};

/// One SCAR sub-problem: a set of labeled positives against all unlabeled.
struct SubproblemEstimate {
  std::size_t cluster = 0;
  /// Dataset rows of the positives in this sub-problem.
  std::vector<std::size_t> positive_rows;
  /// Out-of-fold probabilities of those positives and of every unlabeled row
  /// (in dataset order).
  Probabilities probs_positive;
  Probabilities probs_unlabeled;
  AlphaEstimate estimate;
};

/// Out-of-fold probabilities for every labeled positive against all of U and
/// the PULSCAR estimate from them. Uses the seeds of cluster 0, so it is
/// exactly the single-cluster case of estimate_alpha_snar.
SubproblemEstimate estimate_alpha_pulscar(const PUDataset& dataset, const EstimatorConfig& config,
                                          std::uint64_t seed);

struct SnarAlphaEstimate {
  /// Sum of cluster alphas, clipped to 1.
  double alpha_total = 0.0;
  double alpha_sum = 0.0;
  bool clipped = false;
  std::size_t cluster_count = 0;
  std::vector<SubproblemEstimate> per_cluster;
  ImportanceMap importance;
  std::vector<std::size_t> clustered_features;
  ClusterSelection selection;
  ClusterAssignment assignment;
};

/// Clusters the labeled positives on gain-scaled features and sums the
/// PULSCAR estimates of each cluster against all unlabeled rows.
SnarAlphaEstimate estimate_alpha_snar(const PUDataset& dataset, const EstimatorConfig& config,
                                      std::uint64_t seed);

/// alpha from either estimator.
double estimate_alpha(const PUDataset& dataset, LabelMode mode, const EstimatorConfig& config,
                      std::uint64_t seed);

struct RepeatSummary {
  std::vector<std::uint64_t> seeds;
  /// Estimate per seed; empty where the run failed.
  std::vector<std::optional<double>> estimates;
  std::vector<std::string> failures;
  std::size_t n_failed = 0;
  double mean = 0.0;
  /// Sample standard deviation over sqrt(n).
  double standard_error = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

/// Mean, standard error and the normal 95% interval mean +- 1.96 SE.
/// Needs at least 2 values.
RepeatSummary summarize(std::span<const double> values);

using DatasetSource = std::function<PUDataset(std::uint64_t seed)>;

/// Runs the estimator on source(s) for seeds first_seed .. first_seed + n - 1.
/// Failed seeds are recorded and excluded from the summary.
RepeatSummary run_repeated(const DatasetSource& source, std::size_t n_repeats, LabelMode mode,
                           const EstimatorConfig& config, std::uint64_t first_seed = 0,
                           std::size_t jobs = 1);

}  // namespace puprior
