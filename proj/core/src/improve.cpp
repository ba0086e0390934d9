#include "puprior/improve.hpp"

#include "puprior/csv.hpp"
#include "puprior/rng.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

namespace puprior {
namespace {

std::string optional_number(const std::optional<double>& v) {
  return v ? csv::format_number(*v) : std::string();
}

// Calibrated unlabeled probabilities of one sub-problem (positives then U).
Probabilities calibrate_unlabeled(const Probabilities& probs_positive,
                                  const Probabilities& probs_unlabeled, double alpha,
                                  CalibrationConfig config, std::uint64_t seed) {
  Probabilities probs = probs_positive;
  probs.insert(probs.end(), probs_unlabeled.begin(), probs_unlabeled.end());
  Labels labels(probs.size(), 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(probs_positive.size()), 1);
  config.scope = CalibrationScope::kU;
  config.seed = seed;
  return calibrate(probs, labels, alpha, config).probabilities;
}

}  // namespace

Labels flip_top_alpha(std::span<const double> calibrated_unlabeled, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in [0, 1]");
  const auto n = calibrated_unlabeled.size();
  const auto count = std::min(n, round_count(alpha * static_cast<double>(n)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return calibrated_unlabeled[a] > calibrated_unlabeled[b];
  });
  Labels labels(n, 0);
  for (std::size_t j = 0; j < count; ++j) labels[order[j]] = 1;
  return labels;
}

ImprovementResult run_improvement(const PUDataset& dataset, LabelMode mode,
                                  const ImprovementConfig& config, std::uint64_t seed) {
  dataset.validate();
  if (!dataset.true_label) throw InputError("improvement needs true labels for evaluation");
  const auto& truth = *dataset.true_label;
  const auto unlabeled = dataset.unlabeled_indices();

  ImprovementResult out;
  out.mode = mode;
  Probabilities calibrated;
  if (mode == LabelMode::kScar) {
    const auto sub = estimate_alpha_pulscar(dataset, config.estimator, seed);
    out.alpha = sub.estimate.alpha;
    out.probs_without.assign(dataset.size(), 0.0);
    for (std::size_t j = 0; j < sub.positive_rows.size(); ++j) {
      out.probs_without[sub.positive_rows[j]] = sub.probs_positive[j];
    }
    for (std::size_t j = 0; j < unlabeled.size(); ++j) {
      out.probs_without[unlabeled[j]] = sub.probs_unlabeled[j];
    }
    calibrated = calibrate_unlabeled(sub.probs_positive, sub.probs_unlabeled, out.alpha,
                                     config.calibration,
                                     derive_seed(seed, seed_stage::kCalibration));
  } else {
    const auto est = estimate_alpha_snar(dataset, config.estimator, seed);
    out.alpha = est.alpha_total;
    ClassifierConfig cls = config.estimator.classifier;
    cls.seed = derive_seed(seed, seed_stage::kClusterFolds);
    cls.positive_scale.reset();
    out.probs_without = oof_probabilities(dataset, cls);
    std::vector<Probabilities> per_cluster;
    for (const auto& sub : est.per_cluster) {
      per_cluster.push_back(calibrate_unlabeled(
          sub.probs_positive, sub.probs_unlabeled, sub.estimate.alpha, config.calibration,
          derive_seed(seed, seed_stage::kClusterCalibration + sub.cluster)));
    }
    calibrated = combine_cluster_probs(per_cluster);
  }

  const auto flips = flip_top_alpha(calibrated, out.alpha);
  Labels updated = dataset.pu_label;
  for (std::size_t j = 0; j < unlabeled.size(); ++j) {
    if (flips[j] == 1) {
      updated[unlabeled[j]] = 1;
      ++out.n_flipped;
    }
  }
  ClassifierConfig retrain = config.estimator.classifier;
  retrain.seed = derive_seed(seed, seed_stage::kRetrain);
  retrain.positive_scale.reset();
  out.probs_with = oof_probabilities(dataset.features, updated, retrain);

  out.without = classification_metrics(out.probs_without, truth, config.threshold);
  out.without.variant = "without";
  out.with = classification_metrics(out.probs_with, truth, config.threshold);
  out.with.variant = "with";
  return out;
}

void write_paired_csv(const std::vector<PairedRow>& rows, const std::filesystem::path& path,
                      const std::vector<std::string>& preamble) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  for (const auto& line : preamble) out << "# " << line << '\n';
  out << "seed,variant,alpha,accuracy,auc_roc,brier,f1,mcc,average_precision\n";
  for (const auto& row : rows) {
    for (const auto* m : {&row.result.without, &row.result.with}) {
      out << row.seed << ',' << m->variant << ',' << csv::format_number(row.result.alpha) << ','
          << csv::format_number(m->accuracy) << ',' << optional_number(m->auc_roc) << ','
          << csv::format_number(m->brier) << ',' << csv::format_number(m->f1) << ','
          << optional_number(m->mcc) << ',' << csv::format_number(m->average_precision) << '\n';
    }
  }
}

}  // namespace puprior
