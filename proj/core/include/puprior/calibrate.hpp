#pragma once

#include "puprior/types.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace puprior {

struct FlipSchedule {
  std::size_t n_bins = 100;
  /// round(alpha * |U|).
  std::size_t total = 0;
  std::vector<std::size_t> target;
  std::vector<std::size_t> available;
  std::vector<std::size_t> realized;
  /// Deficit carried into each bin from the bin above it.
  std::vector<std::size_t> carried_in;
  /// Deficit left after the lowest bin, filled with the highest-probability
  /// unlabeled examples that were still unflipped.
  std::size_t bottom_fallback = 0;
};

struct FlipResult {
  FlipSchedule schedule;
  /// New label per unlabeled example (1 = flipped to positive).
  Labels labels;
  /// Indices into the unlabeled vector, in flip order.
  std::vector<std::size_t> flipped;
};

/// Flips round(alpha |U|) unlabeled examples so that their probability
/// histogram follows the labeled positives' histogram. Bin targets split the
/// total by each bin's share of positives (largest remainder). Bins are
/// walked from the top; a bin short of examples flips all it has and passes
/// the deficit down. `strict_pseudocode` uses round(alpha |U| density) per
/// bin instead, which does not conserve the total.
FlipResult build_flip_schedule(std::span<const double> probs_unlabeled,
                               std::span<const double> probs_positive, double alpha,
                               std::size_t n_bins, std::uint64_t seed,
                               bool strict_pseudocode = false);

/// Non-decreasing step function fitted by pool-adjacent-violators.
class IsotonicCalibrator {
 public:
  IsotonicCalibrator() = default;
  IsotonicCalibrator(std::vector<double> knots, std::vector<double> values)
      : knots_(std::move(knots)), values_(std::move(values)) {}

  /// Value of the last knot <= score; clamps below the first knot.
  [[nodiscard]] double predict(double score) const;
  [[nodiscard]] Probabilities predict(std::span<const double> scores) const;

  [[nodiscard]] const std::vector<double>& knots() const { return knots_; }
  [[nodiscard]] const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

/// Least-squares non-decreasing fit; tied scores are pooled first.
IsotonicCalibrator fit_isotonic(std::span<const double> scores, std::span<const int> labels);

class SigmoidCalibrator {
 public:
  SigmoidCalibrator() = default;
  SigmoidCalibrator(double slope, double intercept) : slope_(slope), intercept_(intercept) {}

  [[nodiscard]] double predict(double score) const;
  [[nodiscard]] Probabilities predict(std::span<const double> scores) const;
  [[nodiscard]] double slope() const { return slope_; }
  [[nodiscard]] double intercept() const { return intercept_; }

 private:
  double slope_ = 0.0;
  double intercept_ = 0.0;
};

inline constexpr double kSigmoidRidge = 1e-6;

/// Logistic regression on the score by damped Newton steps, with an L2
/// penalty (ridge/2)(slope^2 + intercept^2) keeping separable fits bounded.
SigmoidCalibrator fit_sigmoid(std::span<const double> scores, std::span<const int> labels,
                              double ridge = kSigmoidRidge);

/// Penalized negative log-likelihood minimized by fit_sigmoid.
double sigmoid_objective(std::span<const double> scores, std::span<const int> labels,
                         double slope, double intercept, double ridge = kSigmoidRidge);

enum class CalibrationMethod { kIsotonic, kSigmoid };
enum class CalibrationScope { kPU, kU };

std::string_view to_string(CalibrationMethod method);
std::string_view to_string(CalibrationScope scope);
CalibrationMethod parse_calibration_method(std::string_view text);
CalibrationScope parse_calibration_scope(std::string_view text);

struct CalibrationConfig {
  CalibrationMethod method = CalibrationMethod::kIsotonic;
  CalibrationScope scope = CalibrationScope::kPU;
  std::size_t n_bins = 100;
  bool strict_pseudocode = false;
  std::uint64_t seed = 0;
};

struct CalibrationResult {
  /// Calibrated probability per scoped example.
  Probabilities probabilities;
  /// Input index of each scoped example.
  std::vector<std::size_t> rows;
  CalibrationMethod method = CalibrationMethod::kIsotonic;
  CalibrationScope scope = CalibrationScope::kPU;
  FlipResult flips;
};

/// Flips unlabeled labels by the schedule, fits the calibrator on the scoped
/// examples (all of them for PU, unlabeled only for U) and returns calibrated
/// probabilities for those examples.
CalibrationResult calibrate(std::span<const double> probs, std::span<const int> pu_labels,
                            double alpha, const CalibrationConfig& config);

/// Elementwise 1 - prod(1 - p_k).
Probabilities combine_cluster_probs(const std::vector<Probabilities>& per_cluster);

struct ReliabilityBin {
  double bin_center = 0.0;
  double mean_predicted = 0.0;
  double fraction_true = 0.0;
  std::size_t count = 0;
};

struct ReliabilityDiagram {
  /// Non-empty bins only.
  std::vector<ReliabilityBin> bins;
  /// Count-weighted least-squares line of fraction_true on mean_predicted;
  /// unset with fewer than two distinct bin means.
  std::optional<double> slope;
  std::optional<double> intercept;
};

ReliabilityDiagram reliability_diagram(std::span<const double> probs, std::span<const int> truth,
                                       std::size_t n_bins = 10);

/// CSV with columns bin_center,mean_predicted,fraction_true.
void write_reliability_csv(const ReliabilityDiagram& diagram, const std::filesystem::path& path,
                           const std::vector<std::string>& preamble = {});

}  // namespace puprior
