#pragma once

#include "puprior/dataset.hpp"
#include "puprior/types.hpp"

#include <json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace puprior {

struct ClassifierConfig {
  std::size_t n_trees = 100;
  std::size_t max_depth = 6;
  double learning_rate = 0.1;
  /// Weight on labeled positives. Unset means |U|/|P| of the training labels.
  std::optional<double> positive_scale;
  std::size_t n_folds = 5;
  std::uint64_t seed = 0;
  double l2 = 1.0;
  double min_child_weight = 1.0;
  std::size_t max_bins = 256;

  void validate() const;
};

/// Feature index -> total loss reduction of the splits made on it. Features
/// that were never split on are absent.
using ImportanceMap = std::map<std::size_t, double>;

struct RegressionTree {
  // Node arrays; feature < 0 marks a leaf.
  std::vector<int> feature;
  std::vector<double> threshold;
  std::vector<int> left;
  std::vector<int> right;
  std::vector<double> value;

  [[nodiscard]] std::size_t n_nodes() const { return feature.size(); }
  [[nodiscard]] double predict(const Matrix& x, Eigen::Index row) const;
};

/// Anything that maps feature rows to class-1 probabilities.
class ProbabilisticModel {
 public:
  virtual ~ProbabilisticModel() = default;
  [[nodiscard]] virtual Probabilities predict_proba(const Matrix& features) const = 0;
  [[nodiscard]] virtual ImportanceMap feature_importance() const = 0;
};

/// Trains a model on (features, labels); the out-of-fold driver and the
/// estimators only see this signature, so other learners can be plugged in.
using Trainer = std::function<std::unique_ptr<ProbabilisticModel>(
    const Matrix& features, const Labels& labels, const ClassifierConfig& config)>;

/// Gradient-boosted regression trees with a logistic link.
class TreeEnsemble final : public ProbabilisticModel {
 public:
  TreeEnsemble() = default;

  [[nodiscard]] Probabilities predict_proba(const Matrix& features) const override;
  [[nodiscard]] ImportanceMap feature_importance() const override;

  /// Raw additive score before the logistic link.
  [[nodiscard]] double margin(const Matrix& features, Eigen::Index row) const;

  [[nodiscard]] std::size_t n_features() const { return n_features_; }
  [[nodiscard]] double base_margin() const { return base_margin_; }
  [[nodiscard]] double positive_scale() const { return positive_scale_; }
  [[nodiscard]] const std::vector<RegressionTree>& trees() const { return trees_; }
  [[nodiscard]] const std::vector<double>& gains() const { return gains_; }
  [[nodiscard]] const ClassifierConfig& config() const { return config_; }

  [[nodiscard]] nlohmann::json to_json() const;
  static TreeEnsemble from_json(const nlohmann::json& doc);

 private:
  friend TreeEnsemble fit(const Matrix&, const Labels&, const ClassifierConfig&);

  ClassifierConfig config_;
  std::size_t n_features_ = 0;
  double base_margin_ = 0.0;
  double positive_scale_ = 1.0;
  std::vector<RegressionTree> trees_;
  std::vector<double> gains_;
};

/// Fits the ensemble with labeled positives weighted by the positive scale.
/// Rows are put in a canonical (content-sorted) order first, so the result
/// does not depend on input row order.
TreeEnsemble fit(const Matrix& features, const Labels& labels, const ClassifierConfig& config);

/// Throws InputError when the feature width differs from the training width.
Probabilities predict_proba(const TreeEnsemble& model, const Matrix& features);

ImportanceMap feature_importance(const TreeEnsemble& model);

Trainer tree_ensemble_trainer();

/// Stratified fold index per row. Within each label, rows are ranked by a
/// seeded hash of their content and dealt round-robin.
std::vector<std::size_t> stratified_folds(const Matrix& features, const Labels& labels,
                                          std::size_t n_folds, std::uint64_t seed);

/// Class-1 probability for each row from the fold model that did not see it.
Probabilities oof_probabilities(const Matrix& features, const Labels& labels,
                                const ClassifierConfig& config,
                                const Trainer& trainer = tree_ensemble_trainer());
Probabilities oof_probabilities(const PUDataset& dataset, const ClassifierConfig& config,
                                const Trainer& trainer = tree_ensemble_trainer());

/// Numerically safe logistic function.
double logistic(double margin);

}  // namespace puprior
