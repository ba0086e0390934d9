#pragma once

#include "puprior/types.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace puprior {

/// Positive-unlabeled data. `pu_label` is the only label estimators may look
/// at; `true_label` and `subclass` exist for evaluation and data preparation.
struct PUDataset {
  Matrix features;  // n_examples x n_features
  std::vector<std::string> feature_names;
  Labels pu_label;                      // 1 = labeled positive, 0 = unlabeled
  std::optional<Labels> true_label;     // hidden ground truth
  std::optional<std::vector<int>> subclass;  // 0 = negative, 1..k positive
  std::uint64_t seed = 0;

  [[nodiscard]] std::size_t size() const { return pu_label.size(); }
  [[nodiscard]] std::size_t n_features() const {
    return static_cast<std::size_t>(features.cols());
  }
  [[nodiscard]] std::size_t n_labeled() const;
  [[nodiscard]] std::size_t n_unlabeled() const { return size() - n_labeled(); }
  [[nodiscard]] std::vector<std::size_t> labeled_indices() const;
  [[nodiscard]] std::vector<std::size_t> unlabeled_indices() const;
  /// Number of unlabeled rows whose true label is positive (requires truth).
  [[nodiscard]] std::size_t n_hidden_positives() const;

  /// Throws InputError unless the dataset is usable for estimation:
  /// consistent shapes, finite features, both label values present, and
  /// every labeled example truly positive when truth is present.
  void validate() const;

  /// Rows `rows` of this dataset, in the given order.
  [[nodiscard]] PUDataset subset(const std::vector<std::size_t>& rows) const;
};

struct SyntheticConfig {
  std::size_t n_positive = 2000;
  std::size_t n_unlabeled = 6000;
  std::size_t n_features = 50;
  std::size_t n_subclasses = 1;
  double alpha_true = 0.1;
  double class_sep = 1.0;
  std::vector<double> subclass_mix{1.0};
  std::uint64_t seed = 0;
};

/// The geometric 1/31, 2/31, 4/31, 8/31, 16/31 subclass layout.
std::vector<double> geometric_mix(std::size_t n_subclasses);

/// Splits `total` into integer parts proportional to `weights` (which must
/// sum to 1): floor each share, then hand the remaining units to the largest
/// fractional parts, ties to the lower index.
std::vector<std::size_t> largest_remainder(std::size_t total,
                                           const std::vector<double>& weights);

/// Round half away from zero, as an unsigned count.
std::size_t round_count(double value);

PUDataset generate_scar(const SyntheticConfig& config);
PUDataset generate_snar(const SyntheticConfig& config);

struct CsvOptions {
  std::string label_column = "pu_label";
  /// Ground-truth column; "true_label" is picked up automatically if present.
  std::optional<std::string> truth_column;
  /// Subclass column; "subclass" is picked up automatically if present.
  std::optional<std::string> subclass_column;
  std::vector<std::string> one_hot_columns;
  std::vector<std::string> ignore_columns;
  char delimiter = ',';
  /// The label column is fully observed ground truth (benchmark data before
  /// any labels are hidden): true_label is set equal to pu_label.
  bool labels_are_truth = false;
};

/// Reads a CSV with a header row into PU form. Label values are non-negative
/// integers; 0 is unlabeled and any value >= 1 is a labeled positive. Values
/// above 1 are also recorded as subclass tags when no subclass column exists.
PUDataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Writes features plus pu_label/true_label/subclass columns. `preamble`
/// lines are emitted first, each prefixed with "# ".
void write_csv(const PUDataset& dataset, const std::filesystem::path& path,
               const std::vector<std::string>& preamble = {}, char delimiter = ',');

/// Number of positives to move into the unlabeled set so that they make up
/// `fraction` of it afterwards: round(fraction * |U| / (1 - fraction)).
std::size_t flip_count(std::size_t n_unlabeled, double fraction);

/// Hides labeled positives among the unlabeled. `kSnar` takes the minor
/// subclasses' share proportionally and splits the rest equally between the
/// two largest subclasses, so labeled and hidden subclass mixes differ.
PUDataset flip_to_unlabeled(const PUDataset& dataset, double fraction, LabelMode mode,
                            std::uint64_t seed);

}  // namespace puprior
