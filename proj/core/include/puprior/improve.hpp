#pragma once

#include "puprior/calibrate.hpp"
#include "puprior/dataset.hpp"
#include "puprior/metrics.hpp"
#include "puprior/pulsnar.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace puprior {

/// Sets round(alpha * n) labels to 1, taking the highest probabilities first
/// and the lower index among equal probabilities.
Labels flip_top_alpha(std::span<const double> calibrated_unlabeled, double alpha);

struct ImprovementConfig {
  EstimatorConfig estimator{};
  /// Method and bin count for calibrating the unlabeled; the scope is always U.
  CalibrationConfig calibration{};
  double threshold = 0.5;
};

struct ImprovementResult {
  LabelMode mode = LabelMode::kScar;
  double alpha = 0.0;
  std::size_t n_flipped = 0;
  MetricsReport without;
  MetricsReport with;
  /// Out-of-fold probabilities per dataset row, before and after flipping.
  Probabilities probs_without;
  Probabilities probs_with;
};

/// "without": out-of-fold predictions on the PU labels. "with": estimate
/// alpha, calibrate the unlabeled (noisy-or across clusters in SNAR mode),
/// flip the top alpha |U| unlabeled to positive and predict out-of-fold
/// again. Both are scored over all rows against the true labels.
ImprovementResult run_improvement(const PUDataset& dataset, LabelMode mode,
                                  const ImprovementConfig& config, std::uint64_t seed);

struct PairedRow {
  std::uint64_t seed = 0;
  ImprovementResult result;
};

/// Columns seed,variant,alpha,accuracy,auc_roc,brier,f1,mcc,average_precision;
/// two rows per seed.
void write_paired_csv(const std::vector<PairedRow>& rows, const std::filesystem::path& path,
                      const std::vector<std::string>& preamble = {});

}  // namespace puprior
