#pragma once

#include "puprior/calibrate.hpp"
#include "puprior/density.hpp"
#include "puprior/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace puprior::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInputError = 2;
inline constexpr int kExitNumericalError = 3;

/// Every setting a command can use, after flags and the config file are merged.
struct RunConfig {
  std::string command;
  std::string input;
  std::string out;
  LabelMode mode = LabelMode::kScar;
  /// Estimator used by `benchmark`; defaults to `mode`.
  std::optional<LabelMode> estimator;
  std::vector<double> alphas;
  BinRule bins = BinRule::kFd;
  std::optional<std::size_t> n_bins;
  double grid_step = 1e-4;
  std::uint64_t seed = 0;
  std::size_t repeats = 1;
  std::size_t jobs = 1;
  CalibrationMethod method = CalibrationMethod::kIsotonic;
  CalibrationScope scope = CalibrationScope::kPU;
  double threshold = 0.5;
  std::optional<std::size_t> n_clusters;
  std::size_t k_max = 25;

  // Input parsing.
  std::string label_column = "pu_label";
  std::vector<std::string> one_hot;
  /// The label column holds ground truth; `generate` and `benchmark` hide
  /// positives themselves.
  bool labels_are_truth = false;

  // Synthetic data.
  std::size_t n_positive = 2000;
  std::size_t n_unlabeled = 6000;
  std::size_t n_features = 50;
  std::size_t n_subclasses = 5;
  double class_sep = 1.0;
};

nlohmann::json to_json(const RunConfig& config);

/// Parses `args` (without the program name), runs the command and returns the
/// process exit code. Reports go to --out or `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace puprior::cli
