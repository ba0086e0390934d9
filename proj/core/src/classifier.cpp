#include "puprior/classifier.hpp"

#include "puprior/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

namespace puprior {
namespace {

// Margins are clamped so that the logistic output stays strictly inside (0,1)
// in double precision.
constexpr double kMarginLimit = 36.0;
constexpr double kMinGain = 1e-12;

struct BinnedData {
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::vector<std::uint8_t> bins;  // row-major
  std::vector<std::vector<double>> cuts;
  std::vector<std::size_t> offset;
  std::size_t total_bins = 0;

  [[nodiscard]] std::size_t n_bins(std::size_t f) const { return cuts[f].size() + 1; }
};

double midpoint(double a, double b) { return a + (b - a) / 2.0; }

// Split candidates for one feature. A value x falls in bin `b` when it is
// greater than b cuts; "x <= cuts[b]" is then the same as "bin <= b".
std::vector<double> make_cuts(std::vector<double> values, std::size_t max_bins) {
  std::sort(values.begin(), values.end());
  std::vector<double> unique = values;
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  std::vector<double> cuts;
  if (unique.size() <= max_bins) {
    for (std::size_t i = 1; i < unique.size(); ++i) cuts.push_back(midpoint(unique[i - 1], unique[i]));
    return cuts;
  }
  const std::size_t n = values.size();
  for (std::size_t q = 1; q < max_bins; ++q) {
    const double v = values[q * n / max_bins];
    const auto next = std::upper_bound(unique.begin(), unique.end(), v);
    if (next == unique.end()) break;
    const double cut = midpoint(v, *next);
    if (cuts.empty() || cut > cuts.back()) cuts.push_back(cut);
  }
  return cuts;
}

BinnedData bin_features(const Matrix& x, std::size_t max_bins) {
  BinnedData data;
  data.n_rows = static_cast<std::size_t>(x.rows());
  data.n_features = static_cast<std::size_t>(x.cols());
  data.bins.resize(data.n_rows * data.n_features);
  data.cuts.resize(data.n_features);
  data.offset.resize(data.n_features);
  for (std::size_t f = 0; f < data.n_features; ++f) {
    const auto col = x.col(static_cast<Eigen::Index>(f));
    std::vector<double> values(col.data(), col.data() + col.size());
    data.cuts[f] = make_cuts(values, max_bins);
    data.offset[f] = data.total_bins;
    data.total_bins += data.n_bins(f);
    const auto& cuts = data.cuts[f];
    for (std::size_t i = 0; i < data.n_rows; ++i) {
      const auto b = std::lower_bound(cuts.begin(), cuts.end(), values[i]) - cuts.begin();
      data.bins[i * data.n_features + f] = static_cast<std::uint8_t>(b);
    }
  }
  return data;
}

bool row_less(const Matrix& x, const Labels& y, Eigen::Index a, Eigen::Index b) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double va = x(a, j);
    const double vb = x(b, j);
    if (va < vb) return true;
    if (vb < va) return false;
  }
  return y[static_cast<std::size_t>(a)] < y[static_cast<std::size_t>(b)];
}

struct Split {
  double gain = 0.0;
  std::size_t feature = 0;
  std::size_t bin = 0;
  bool found = false;
};

struct BuildNode {
  int id;
  std::size_t begin;
  std::size_t end;
  double grad;
  double hess;
  std::vector<double> hist;  // interleaved (grad, hess) per global bin
};

class TreeBuilder {
 public:
  TreeBuilder(const BinnedData& data, const ClassifierConfig& config)
      : data_(data), config_(config), order_(data.n_rows), scratch_(data.n_rows) {}

  RegressionTree build(const std::vector<double>& grad, const std::vector<double>& hess,
                       std::vector<double>& margin, std::vector<double>& gains) {
    grad_ = &grad;
    hess_ = &hess;
    RegressionTree tree;
    std::iota(order_.begin(), order_.end(), std::size_t{0});

    BuildNode root{add_node(tree), 0, data_.n_rows, 0.0, 0.0, {}};
    for (std::size_t i = 0; i < data_.n_rows; ++i) {
      root.grad += grad[i];
      root.hess += hess[i];
    }
    root.hist = histogram(0, data_.n_rows);

    std::vector<BuildNode> level;
    level.push_back(std::move(root));
    for (std::size_t depth = 0; !level.empty(); ++depth) {
      std::vector<BuildNode> next;
      for (auto& node : level) {
        const Split split = depth < config_.max_depth ? best_split(node) : Split{};
        if (!split.found) {
          make_leaf(tree, node, margin);
          continue;
        }
        gains[split.feature] += split.gain;
        const auto mid = partition(node, split);
        BuildNode left{add_node(tree), node.begin, mid, 0.0, 0.0, {}};
        BuildNode right{add_node(tree), mid, node.end, 0.0, 0.0, {}};
        for (std::size_t r = left.begin; r < left.end; ++r) {
          left.grad += grad[order_[r]];
          left.hess += hess[order_[r]];
        }
        right.grad = node.grad - left.grad;
        right.hess = node.hess - left.hess;
        auto& small = (left.end - left.begin) <= (right.end - right.begin) ? left : right;
        auto& large = &small == &left ? right : left;
        small.hist = histogram(small.begin, small.end);
        large.hist = std::move(node.hist);
        for (std::size_t k = 0; k < large.hist.size(); ++k) large.hist[k] -= small.hist[k];

        const auto id = static_cast<std::size_t>(node.id);
        tree.feature[id] = static_cast<int>(split.feature);
        tree.threshold[id] = data_.cuts[split.feature][split.bin];
        tree.left[id] = left.id;
        tree.right[id] = right.id;
        next.push_back(std::move(left));
        next.push_back(std::move(right));
      }
      level = std::move(next);
    }
    return tree;
  }

 private:
  static int add_node(RegressionTree& tree) {
    tree.feature.push_back(-1);
    tree.threshold.push_back(0.0);
    tree.left.push_back(-1);
    tree.right.push_back(-1);
    tree.value.push_back(0.0);
    return static_cast<int>(tree.feature.size() - 1);
  }

  std::vector<double> histogram(std::size_t begin, std::size_t end) const {
    std::vector<double> hist(2 * data_.total_bins, 0.0);
    const auto d = data_.n_features;
    for (std::size_t r = begin; r < end; ++r) {
      const auto row = order_[r];
      const std::uint8_t* bins = data_.bins.data() + row * d;
      const double g = (*grad_)[row];
      const double h = (*hess_)[row];
      for (std::size_t f = 0; f < d; ++f) {
        const auto k = 2 * (data_.offset[f] + bins[f]);
        hist[k] += g;
        hist[k + 1] += h;
      }
    }
    return hist;
  }

  [[nodiscard]] double score(double g, double h) const { return g * g / (h + config_.l2); }

  Split best_split(const BuildNode& node) const {
    Split best;
    if (node.end - node.begin < 2 || node.hess < 2.0 * config_.min_child_weight) return best;
    const double parent = score(node.grad, node.hess);
    for (std::size_t f = 0; f < data_.n_features; ++f) {
      double gl = 0.0;
      double hl = 0.0;
      const auto nb = data_.n_bins(f);
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        const auto k = 2 * (data_.offset[f] + b);
        gl += node.hist[k];
        hl += node.hist[k + 1];
        if (hl < config_.min_child_weight) continue;
        const double hr = node.hess - hl;
        if (hr < config_.min_child_weight) break;
        const double gain = 0.5 * (score(gl, hl) + score(node.grad - gl, hr) - parent);
        if (gain > kMinGain && gain > best.gain) {
          best = {gain, f, b, true};
        }
      }
    }
    return best;
  }

  std::size_t partition(const BuildNode& node, const Split& split) {
    const auto d = data_.n_features;
    std::size_t left = node.begin;
    std::size_t right = 0;
    for (std::size_t r = node.begin; r < node.end; ++r) {
      const auto row = order_[r];
      if (data_.bins[row * d + split.feature] <= split.bin) {
        order_[left++] = row;
      } else {
        scratch_[right++] = row;
      }
    }
    std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(right),
              order_.begin() + static_cast<std::ptrdiff_t>(left));
    return left;
  }

  void make_leaf(RegressionTree& tree, const BuildNode& node, std::vector<double>& margin) {
    const double value = -node.grad / (node.hess + config_.l2) * config_.learning_rate;
    tree.value[static_cast<std::size_t>(node.id)] = value;
    for (std::size_t r = node.begin; r < node.end; ++r) margin[order_[r]] += value;
  }

  const BinnedData& data_;
  const ClassifierConfig& config_;
  const std::vector<double>* grad_ = nullptr;
  const std::vector<double>* hess_ = nullptr;
  std::vector<std::size_t> order_;
  std::vector<std::size_t> scratch_;
};

std::uint64_t row_hash(const Matrix& x, Eigen::Index row, int label, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double v = x(row, j);
    if (v == 0.0) v = 0.0;  // fold -0.0 into +0.0
    std::uint64_t state = h ^ std::bit_cast<std::uint64_t>(v);
    h = splitmix64(state);
  }
  std::uint64_t state = h ^ static_cast<std::uint64_t>(label);
  return splitmix64(state);
}

}  // namespace

void ClassifierConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InputError("learning_rate must be positive");
  if (positive_scale && !(*positive_scale > 0.0)) throw InputError("positive_scale must be positive");
  if (n_folds < 2) throw InputError("n_folds must be at least 2");
  if (max_bins < 2 || max_bins > 256) throw InputError("max_bins must lie in [2, 256]");
  if (l2 < 0.0 || min_child_weight < 0.0) throw InputError("regularization must be non-negative");
}

double logistic(double margin) {
  if (margin >= 0.0) return 1.0 / (1.0 + std::exp(-margin));
  const double e = std::exp(margin);
  return e / (1.0 + e);
}

double RegressionTree::predict(const Matrix& x, Eigen::Index row) const {
  std::size_t node = 0;
  while (feature[node] >= 0) {
    node = static_cast<std::size_t>(x(row, feature[node]) <= threshold[node] ? left[node] : right[node]);
  }
  return value[node];
}

double TreeEnsemble::margin(const Matrix& features, Eigen::Index row) const {
  double m = base_margin_;
  for (const auto& tree : trees_) m += tree.predict(features, row);
  return m;
}

Probabilities TreeEnsemble::predict_proba(const Matrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != n_features_) {
    throw InputError("feature width " + std::to_string(features.cols()) +
                     " does not match training width " + std::to_string(n_features_));
  }
  Probabilities out(static_cast<std::size_t>(features.rows()));
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    out[static_cast<std::size_t>(i)] =
        logistic(std::clamp(margin(features, i), -kMarginLimit, kMarginLimit));
  }
  return out;
}

ImportanceMap TreeEnsemble::feature_importance() const {
  ImportanceMap out;
  for (std::size_t f = 0; f < gains_.size(); ++f) {
    if (gains_[f] > 0.0) out[f] = gains_[f];
  }
  return out;
}

TreeEnsemble fit(const Matrix& features, const Labels& labels, const ClassifierConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(features.rows());
  if (labels.size() != n) throw InputError("label count does not match feature rows");
  if (n == 0 || features.cols() == 0) throw InputError("empty training data");
  if (!features.allFinite()) throw InputError("training features contain non-finite values");
  const auto n_pos = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
  if (n_pos + static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 0)) != n) {
    throw InputError("labels must be 0 or 1");
  }
  if (n_pos == 0 || n_pos == n) throw InputError("training labels contain a single class");

  std::vector<Eigen::Index> canonical(n);
  std::iota(canonical.begin(), canonical.end(), Eigen::Index{0});
  std::sort(canonical.begin(), canonical.end(), [&](Eigen::Index a, Eigen::Index b) {
    return row_less(features, labels, a, b);
  });
  const Matrix x = features(canonical, Eigen::all);
  Labels y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = labels[static_cast<std::size_t>(canonical[i])];

  TreeEnsemble model;
  model.config_ = config;
  model.n_features_ = static_cast<std::size_t>(features.cols());
  model.positive_scale_ = config.positive_scale.value_or(
      static_cast<double>(n - n_pos) / static_cast<double>(n_pos));
  model.gains_.assign(model.n_features_, 0.0);

  std::vector<double> weight(n);
  for (std::size_t i = 0; i < n; ++i) weight[i] = y[i] == 1 ? model.positive_scale_ : 1.0;
  model.base_margin_ = std::log(model.positive_scale_ * static_cast<double>(n_pos) /
                                static_cast<double>(n - n_pos));

  const BinnedData data = bin_features(x, config.max_bins);
  TreeBuilder builder(data, config);
  std::vector<double> margin(n, model.base_margin_);
  std::vector<double> grad(n);
  std::vector<double> hess(n);
  model.trees_.reserve(config.n_trees);
  for (std::size_t t = 0; t < config.n_trees; ++t) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = logistic(margin[i]);
      grad[i] = weight[i] * (p - static_cast<double>(y[i]));
      hess[i] = weight[i] * p * (1.0 - p);
    }
    model.trees_.push_back(builder.build(grad, hess, margin, model.gains_));
  }
  return model;
}

Probabilities predict_proba(const TreeEnsemble& model, const Matrix& features) {
  return model.predict_proba(features);
}

ImportanceMap feature_importance(const TreeEnsemble& model) { return model.feature_importance(); }

Trainer tree_ensemble_trainer() {
  return [](const Matrix& features, const Labels& labels, const ClassifierConfig& config) {
    return std::make_unique<TreeEnsemble>(fit(features, labels, config));
  };
}

std::vector<std::size_t> stratified_folds(const Matrix& features, const Labels& labels,
                                          std::size_t n_folds, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(features.rows());
  if (labels.size() != n) throw InputError("label count does not match feature rows");
  if (n_folds < 2) throw InputError("n_folds must be at least 2");
  std::vector<std::size_t> fold(n, 0);
  for (int cls : {0, 1}) {
    std::vector<std::pair<std::uint64_t, std::size_t>> keyed;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] == cls) {
        keyed.emplace_back(row_hash(features, static_cast<Eigen::Index>(i), cls, seed), i);
      }
    }
    if (keyed.size() < n_folds) {
      throw InputError("n_folds (" + std::to_string(n_folds) + ") exceeds the " +
                       std::to_string(keyed.size()) + " examples with label " + std::to_string(cls));
    }
    std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first < b.first;
      const auto ra = static_cast<Eigen::Index>(a.second);
      const auto rb = static_cast<Eigen::Index>(b.second);
      if (row_less(features, labels, ra, rb)) return true;
      if (row_less(features, labels, rb, ra)) return false;
      return a.second < b.second;
    });
    for (std::size_t r = 0; r < keyed.size(); ++r) fold[keyed[r].second] = r % n_folds;
  }
  return fold;
}

Probabilities oof_probabilities(const Matrix& features, const Labels& labels,
                                const ClassifierConfig& config, const Trainer& trainer) {
  config.validate();
  const auto folds = stratified_folds(features, labels, config.n_folds, config.seed);
  const auto n = static_cast<std::size_t>(features.rows());
  Probabilities out(n, 0.0);
  for (std::size_t k = 0; k < config.n_folds; ++k) {
    std::vector<Eigen::Index> train;
    std::vector<Eigen::Index> test;
    Labels train_labels;
    for (std::size_t i = 0; i < n; ++i) {
      if (folds[i] == k) {
        test.push_back(static_cast<Eigen::Index>(i));
      } else {
        train.push_back(static_cast<Eigen::Index>(i));
        train_labels.push_back(labels[i]);
      }
    }
    const Matrix train_x = features(train, Eigen::all);
    const Matrix test_x = features(test, Eigen::all);
    const auto model = trainer(train_x, train_labels, config);
    const auto probs = model->predict_proba(test_x);
    for (std::size_t r = 0; r < test.size(); ++r) out[static_cast<std::size_t>(test[r])] = probs[r];
  }
  return out;
}

Probabilities oof_probabilities(const PUDataset& dataset, const ClassifierConfig& config,
                                const Trainer& trainer) {
  return oof_probabilities(dataset.features, dataset.pu_label, config, trainer);
}

// ---------------------------------------------------------------------------
// Serialization

nlohmann::json TreeEnsemble::to_json() const {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) {
    trees.push_back({{"feature", tree.feature},
                     {"threshold", tree.threshold},
                     {"left", tree.left},
                     {"right", tree.right},
                     {"value", tree.value}});
  }
  nlohmann::json config = {{"n_trees", config_.n_trees},
                           {"max_depth", config_.max_depth},
                           {"learning_rate", config_.learning_rate},
                           {"n_folds", config_.n_folds},
                           {"seed", config_.seed},
                           {"l2", config_.l2},
                           {"min_child_weight", config_.min_child_weight},
                           {"max_bins", config_.max_bins}};
  if (config_.positive_scale) config["positive_scale"] = *config_.positive_scale;
  return {{"format", "puprior.tree_ensemble"},
          {"version", 1},
          {"n_features", n_features_},
          {"base_margin", base_margin_},
          {"positive_scale", positive_scale_},
          {"gains", gains_},
          {"config", config},
          {"trees", trees}};
}

TreeEnsemble TreeEnsemble::from_json(const nlohmann::json& doc) {
  if (doc.value("format", "") != "puprior.tree_ensemble") {
    throw InputError("not a tree ensemble document");
  }
  if (doc.value("version", 0) != 1) throw InputError("unsupported tree ensemble version");
  TreeEnsemble model;
  try {
    const auto& config = doc.at("config");
    model.config_.n_trees = config.at("n_trees").get<std::size_t>();
    model.config_.max_depth = config.at("max_depth").get<std::size_t>();
    model.config_.learning_rate = config.at("learning_rate").get<double>();
    model.config_.n_folds = config.at("n_folds").get<std::size_t>();
    model.config_.seed = config.at("seed").get<std::uint64_t>();
    model.config_.l2 = config.at("l2").get<double>();
    model.config_.min_child_weight = config.at("min_child_weight").get<double>();
    model.config_.max_bins = config.at("max_bins").get<std::size_t>();
    if (config.contains("positive_scale")) {
      model.config_.positive_scale = config.at("positive_scale").get<double>();
    }
    model.n_features_ = doc.at("n_features").get<std::size_t>();
    model.base_margin_ = doc.at("base_margin").get<double>();
    model.positive_scale_ = doc.at("positive_scale").get<double>();
    model.gains_ = doc.at("gains").get<std::vector<double>>();
    for (const auto& t : doc.at("trees")) {
      RegressionTree tree;
      tree.feature = t.at("feature").get<std::vector<int>>();
      tree.threshold = t.at("threshold").get<std::vector<double>>();
      tree.left = t.at("left").get<std::vector<int>>();
      tree.right = t.at("right").get<std::vector<int>>();
      tree.value = t.at("value").get<std::vector<double>>();
      const auto nodes = tree.feature.size();
      if (nodes == 0 || tree.threshold.size() != nodes || tree.left.size() != nodes ||
          tree.right.size() != nodes || tree.value.size() != nodes) {
        throw InputError("malformed tree arrays");
      }
      for (std::size_t i = 0; i < nodes; ++i) {
        if (tree.feature[i] < 0) continue;
        if (static_cast<std::size_t>(tree.feature[i]) >= model.n_features_ ||
            tree.left[i] <= static_cast<int>(i) || tree.right[i] <= static_cast<int>(i) ||
            static_cast<std::size_t>(tree.left[i]) >= nodes ||
            static_cast<std::size_t>(tree.right[i]) >= nodes) {
          throw InputError("malformed tree node");
        }
      }
      model.trees_.push_back(std::move(tree));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed tree ensemble document: ") + e.what());
  }
  return model;
}

}  // namespace puprior
