#include "puprior/pulsnar.hpp"

#include "puprior/parallel.hpp"
#include "puprior/rng.hpp"

#include <cmath>
#include <numeric>

namespace puprior {
namespace {

SubproblemEstimate solve_subproblem(const PUDataset& dataset, std::vector<std::size_t> positives,
                                    std::size_t cluster, const EstimatorConfig& config,
                                    std::uint64_t seed) {
  const auto unlabeled = dataset.unlabeled_indices();
  std::vector<std::size_t> rows = positives;
  rows.insert(rows.end(), unlabeled.begin(), unlabeled.end());
  const auto sub = dataset.subset(rows);

  ClassifierConfig cls = config.classifier;
  cls.seed = derive_seed(seed, seed_stage::kClusterFolds + cluster);
  cls.positive_scale.reset();  // |U| / |P_c| of this sub-problem
  const auto probs = oof_probabilities(sub, cls);

  SubproblemEstimate out;
  out.cluster = cluster;
  out.positive_rows = std::move(positives);
  const auto n_pos = out.positive_rows.size();
  out.probs_positive.assign(probs.begin(), probs.begin() + static_cast<std::ptrdiff_t>(n_pos));
  out.probs_unlabeled.assign(probs.begin() + static_cast<std::ptrdiff_t>(n_pos), probs.end());
  out.estimate = estimate_alpha_scar(out.probs_positive, out.probs_unlabeled, config.pulscar,
                                     derive_seed(seed, seed_stage::kClusterOptimizer + cluster));
  return out;
}

}  // namespace

SubproblemEstimate estimate_alpha_pulscar(const PUDataset& dataset, const EstimatorConfig& config,
                                          std::uint64_t seed) {
  dataset.validate();
  return solve_subproblem(dataset, dataset.labeled_indices(), 0, config, seed);
}

SnarAlphaEstimate estimate_alpha_snar(const PUDataset& dataset, const EstimatorConfig& config,
                                      std::uint64_t seed) {
  dataset.validate();
  const auto positives = dataset.labeled_indices();
  if (positives.size() < config.min_cluster_size) {
    throw InputError("need at least " + std::to_string(config.min_cluster_size) +
                     " labeled positives to cluster");
  }

  SnarAlphaEstimate out;
  ClassifierConfig cls = config.classifier;
  cls.seed = derive_seed(seed, seed_stage::kClassifier);
  cls.positive_scale.reset();
  out.importance = fit(dataset.features, dataset.pu_label, cls).feature_importance();

  std::vector<Eigen::Index> pos_idx(positives.begin(), positives.end());
  const Matrix pos_features = dataset.features(pos_idx, Eigen::all);
  const Matrix scaled = scale_by_importance(pos_features, out.importance, &out.clustered_features);

  GmmConfig gmm = config.gmm;
  gmm.seed = derive_seed(seed, seed_stage::kClustering);
  if (config.n_clusters) {
    if (*config.n_clusters < 1) throw InputError("n_clusters must be at least 1");
    out.selection.k = *config.n_clusters;
    out.selection.k_max = *config.n_clusters;
    GmmConfig fixed = gmm;
    fixed.seed = derive_seed(gmm.seed, *config.n_clusters);
    out.selection.model = gmm_fit(scaled, *config.n_clusters, fixed);
    out.selection.bic = {bic(out.selection.model, scaled)};
  } else {
    out.selection = select_cluster_count(scaled, config.k_max, gmm, config.jobs);
  }
  out.assignment = assign_clusters(out.selection.model, scaled, config.min_cluster_size);
  out.cluster_count = out.assignment.n_clusters();

  std::vector<std::vector<std::size_t>> members(out.cluster_count);
  for (std::size_t i = 0; i < positives.size(); ++i) {
    members[out.assignment.cluster[i]].push_back(positives[i]);
  }
  out.per_cluster.resize(out.cluster_count);
  parallel_for(out.cluster_count, config.jobs, [&](std::size_t c) {
    out.per_cluster[c] = solve_subproblem(dataset, members[c], c, config, seed);
  });

  for (const auto& sub : out.per_cluster) out.alpha_sum += sub.estimate.alpha;
  out.clipped = out.alpha_sum > 1.0;
  out.alpha_total = std::min(out.alpha_sum, 1.0);
  return out;
}

double estimate_alpha(const PUDataset& dataset, LabelMode mode, const EstimatorConfig& config,
                      std::uint64_t seed) {
  if (mode == LabelMode::kScar) return estimate_alpha_pulscar(dataset, config, seed).estimate.alpha;
  return estimate_alpha_snar(dataset, config, seed).alpha_total;
}

RepeatSummary summarize(std::span<const double> values) {
  if (values.size() < 2) throw InputError("a summary needs at least 2 values");
  RepeatSummary out;
  const auto n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  out.ci_low = out.mean - 1.96 * out.standard_error;
  out.ci_high = out.mean + 1.96 * out.standard_error;
  return out;
}

RepeatSummary run_repeated(const DatasetSource& source, std::size_t n_repeats, LabelMode mode,
                           const EstimatorConfig& config, std::uint64_t first_seed,
                           std::size_t jobs) {
  if (n_repeats < 2) throw InputError("n_repeats must be at least 2");
  std::vector<std::optional<double>> estimates(n_repeats);
  std::vector<std::string> messages(n_repeats);
  EstimatorConfig inner = config;
  inner.jobs = 1;
  parallel_for(n_repeats, jobs, [&](std::size_t i) {
    const std::uint64_t seed = first_seed + i;
    try {
      estimates[i] = estimate_alpha(source(seed), mode, inner, seed);
    } catch (const std::exception& e) {
      messages[i] = e.what();
    }
  });

  std::vector<double> ok;
  for (const auto& e : estimates) {
    if (e) ok.push_back(*e);
  }
  RepeatSummary out;
  if (ok.size() >= 2) {
    out = summarize(ok);
  } else if (ok.size() == 1) {
    out.mean = out.ci_low = out.ci_high = ok.front();
  }
  for (std::size_t i = 0; i < n_repeats; ++i) {
    out.seeds.push_back(first_seed + i);
    if (!estimates[i]) {
      ++out.n_failed;
      out.failures.push_back("seed " + std::to_string(first_seed + i) + ": " + messages[i]);
    }
  }
  out.estimates = std::move(estimates);
  return out;
}

}  // namespace puprior
