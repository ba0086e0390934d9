#pragma once

#include <optional>
#include <span>
#include <string>

namespace puprior {

struct MetricsReport {
  double accuracy = 0.0;
  /// Unset when the truth has a single class.
  std::optional<double> auc_roc;
  double brier = 0.0;
  double f1 = 0.0;
  /// Unset when the truth has a single class; 0 when a margin is empty.
  std::optional<double> mcc;
  double average_precision = 0.0;
  double threshold = 0.5;
  std::string variant;
};

/// Thresholded metrics predict 1 when p >= threshold. AUC uses midranks for
/// ties; average precision sums precision times recall increments over the
/// distinct score thresholds.
MetricsReport classification_metrics(std::span<const double> probs, std::span<const int> truth,
                                     double threshold = 0.5);

std::optional<double> roc_auc(std::span<const double> probs, std::span<const int> truth);
double average_precision(std::span<const double> probs, std::span<const int> truth);

}  // namespace puprior
