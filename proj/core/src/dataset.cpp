#include "puprior/dataset.hpp"

#include "puprior/csv.hpp"
#include "puprior/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>

namespace puprior {

std::size_t PUDataset::n_labeled() const {
  return static_cast<std::size_t>(std::count(pu_label.begin(), pu_label.end(), 1));
}

std::vector<std::size_t> PUDataset::labeled_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pu_label.size(); ++i) {
    if (pu_label[i] == 1) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> PUDataset::unlabeled_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pu_label.size(); ++i) {
    if (pu_label[i] == 0) out.push_back(i);
  }
  return out;
}

std::size_t PUDataset::n_hidden_positives() const {
  if (!true_label) throw InputError("dataset has no ground-truth labels");
  std::size_t count = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (pu_label[i] == 0 && (*true_label)[i] == 1) ++count;
  }
  return count;
}

void PUDataset::validate() const {
  const auto n = size();
  if (static_cast<std::size_t>(features.rows()) != n) {
    throw InputError("feature rows do not match label count");
  }
  if (!feature_names.empty() && feature_names.size() != n_features()) {
    throw InputError("feature name count does not match feature columns");
  }
  if (true_label && true_label->size() != n) throw InputError("true_label length mismatch");
  if (subclass && subclass->size() != n) throw InputError("subclass length mismatch");
  if (!features.allFinite()) throw InputError("feature matrix contains non-finite values");
  std::size_t labeled = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int s = pu_label[i];
    if (s != 0 && s != 1) throw InputError("pu_label must be 0 or 1");
    labeled += static_cast<std::size_t>(s);
    if (true_label && s == 1 && (*true_label)[i] != 1) {
      throw InputError("labeled example " + std::to_string(i) + " is not a true positive");
    }
  }
  if (labeled == 0) throw InputError("no labeled positive examples");
  if (labeled == n) throw InputError("no unlabeled examples");
}

PUDataset PUDataset::subset(const std::vector<std::size_t>& rows) const {
  PUDataset out;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.feature_names = feature_names;
  out.seed = seed;
  out.pu_label.reserve(rows.size());
  if (true_label) out.true_label.emplace();
  if (subclass) out.subclass.emplace();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto i = rows[r];
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(i));
    out.pu_label.push_back(pu_label[i]);
    if (true_label) out.true_label->push_back((*true_label)[i]);
    if (subclass) out.subclass->push_back((*subclass)[i]);
  }
  return out;
}

std::vector<double> geometric_mix(std::size_t n_subclasses) {
  std::vector<double> mix(n_subclasses);
  double total = 0.0;
  for (std::size_t i = 0; i < n_subclasses; ++i) {
    mix[i] = std::ldexp(1.0, static_cast<int>(i));
    total += mix[i];
  }
  for (auto& m : mix) m /= total;
  return mix;
}

std::size_t round_count(double value) {
  return static_cast<std::size_t>(std::llround(value));
}

std::vector<std::size_t> largest_remainder(std::size_t total,
                                           const std::vector<double>& weights) {
  std::vector<std::size_t> parts(weights.size());
  std::vector<double> remainders(weights.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double share = static_cast<double>(total) * weights[i];
    parts[i] = static_cast<std::size_t>(std::floor(share));
    remainders[i] = share - std::floor(share);
    assigned += parts[i];
  }
  std::vector<std::size_t> order(weights.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainders[a] > remainders[b]; });
  for (std::size_t j = 0; assigned < total && !order.empty(); ++j) {
    ++parts[order[j % order.size()]];
    ++assigned;
  }
  return parts;
}

namespace {

void check_mix(const std::vector<double>& mix) {
  double sum = 0.0;
  for (double m : mix) {
    if (!(m >= 0.0)) throw InputError("subclass_mix entries must be non-negative");
    sum += m;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw InputError("subclass_mix must sum to 1");
}

void check_common(const SyntheticConfig& config) {
  if (config.n_positive == 0 || config.n_unlabeled == 0 || config.n_features == 0) {
    throw InputError("example and feature counts must be positive");
  }
  if (!(config.alpha_true >= 0.0 && config.alpha_true < 1.0)) {
    throw InputError("alpha_true must lie in [0, 1)");
  }
  if (!(config.class_sep > 0.0)) throw InputError("class_sep must be positive");
}

// Class c (0 = negative, 1..k positive subclasses) is an identity-covariance
// Gaussian centred on a random vertex of the hypercube [-sep, sep]^d_inf; a
// fifth of the columns are random linear combinations of the informative ones.
PUDataset synthesize(const SyntheticConfig& config,
                     const std::vector<std::size_t>& labeled_per_subclass,
                     const std::vector<std::size_t>& hidden_per_subclass,
                     std::size_t n_negative) {
  const std::size_t k = labeled_per_subclass.size();
  const std::size_t n_redundant = config.n_features / 5;
  const std::size_t n_informative = config.n_features - n_redundant;
  Rng rng(config.seed);

  Matrix means(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(n_informative));
  for (Eigen::Index c = 0; c < means.rows(); ++c) {
    for (Eigen::Index j = 0; j < means.cols(); ++j) {
      means(c, j) = (rng.next() >> 63) ? config.class_sep : -config.class_sep;
    }
  }
  Matrix mixing(static_cast<Eigen::Index>(n_informative), static_cast<Eigen::Index>(n_redundant));
  for (Eigen::Index i = 0; i < mixing.rows(); ++i) {
    for (Eigen::Index j = 0; j < mixing.cols(); ++j) mixing(i, j) = rng.uniform(-1.0, 1.0);
  }

  struct RowSpec {
    int subclass;
    int pu_label;
  };
  std::vector<RowSpec> labeled_rows;
  std::vector<RowSpec> unlabeled_rows;
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < labeled_per_subclass[c]; ++i) {
      labeled_rows.push_back({static_cast<int>(c + 1), 1});
    }
    for (std::size_t i = 0; i < hidden_per_subclass[c]; ++i) {
      unlabeled_rows.push_back({static_cast<int>(c + 1), 0});
    }
  }
  for (std::size_t i = 0; i < n_negative; ++i) unlabeled_rows.push_back({0, 0});
  rng.shuffle(std::span<RowSpec>(unlabeled_rows));

  std::vector<RowSpec> rows = std::move(labeled_rows);
  rows.insert(rows.end(), unlabeled_rows.begin(), unlabeled_rows.end());

  PUDataset out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.features.resize(n, static_cast<Eigen::Index>(config.n_features));
  out.true_label.emplace();
  out.subclass.emplace();
  out.seed = config.seed;
  Vector informative(static_cast<Eigen::Index>(n_informative));
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& spec = rows[static_cast<std::size_t>(r)];
    for (Eigen::Index j = 0; j < informative.size(); ++j) {
      informative(j) = means(spec.subclass, j) + rng.normal();
    }
    out.features.row(r).head(informative.size()) = informative.transpose();
    if (n_redundant > 0) {
      out.features.row(r).tail(static_cast<Eigen::Index>(n_redundant)) =
          informative.transpose() * mixing;
    }
    out.pu_label.push_back(spec.pu_label);
    out.true_label->push_back(spec.subclass > 0 ? 1 : 0);
    out.subclass->push_back(spec.subclass);
  }
  for (std::size_t j = 0; j < config.n_features; ++j) {
    out.feature_names.push_back("f" + std::to_string(j));
  }
  return out;
}

}  // namespace

PUDataset generate_scar(const SyntheticConfig& config) {
  check_common(config);
  if (config.n_subclasses != 1) throw InputError("generate_scar requires n_subclasses = 1");
  const std::size_t hidden = round_count(config.alpha_true * static_cast<double>(config.n_unlabeled));
  return synthesize(config, {config.n_positive}, {hidden}, config.n_unlabeled - hidden);
}

PUDataset generate_snar(const SyntheticConfig& config) {
  check_common(config);
  if (config.n_subclasses < 2) throw InputError("generate_snar requires at least 2 subclasses");
  if (config.subclass_mix.size() != config.n_subclasses) {
    throw InputError("subclass_mix length must equal n_subclasses");
  }
  check_mix(config.subclass_mix);
  const std::size_t hidden = round_count(config.alpha_true * static_cast<double>(config.n_unlabeled));
  const std::vector<double> equal(config.n_subclasses, 1.0 / static_cast<double>(config.n_subclasses));
  return synthesize(config, largest_remainder(config.n_positive, equal),
                    largest_remainder(hidden, config.subclass_mix), config.n_unlabeled - hidden);
}

PUDataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  if (!std::filesystem::exists(path)) throw InputError("file not found: " + path.string());
  const auto table = csv::read(path, options.delimiter);

  const int label_col = table.column(options.label_column);
  if (label_col < 0) throw InputError("label column '" + options.label_column + "' not found");
  auto optional_column = [&](const std::optional<std::string>& name, std::string_view fallback) {
    if (name) {
      const int idx = table.column(*name);
      if (idx < 0) throw InputError("column '" + *name + "' not found");
      return idx;
    }
    return table.column(fallback);
  };
  const int truth_col = optional_column(options.truth_column, "true_label");
  const int subclass_col = optional_column(options.subclass_column, "subclass");

  std::set<std::string> one_hot(options.one_hot_columns.begin(), options.one_hot_columns.end());
  std::set<std::string> ignored(options.ignore_columns.begin(), options.ignore_columns.end());
  for (const auto& name : one_hot) {
    if (table.column(name) < 0) throw InputError("one-hot column '" + name + "' not found");
  }

  auto parse_label = [&](const std::string& text, std::size_t row, const char* what) {
    double value = 0.0;
    if (!csv::parse_number(text, value) || value < 0.0 || value != std::floor(value)) {
      throw InputError(std::string("row ") + std::to_string(row + 1) + ": unknown " + what +
                       " value '" + text + "'");
    }
    return static_cast<int>(value);
  };

  // Resolve the output columns first: one indicator per distinct category.
  struct Column {
    int source;
    std::optional<std::string> category;
  };
  std::vector<Column> columns;
  PUDataset out;
  for (int c = 0; c < static_cast<int>(table.header.size()); ++c) {
    const auto& name = table.header[static_cast<std::size_t>(c)];
    if (c == label_col || c == truth_col || c == subclass_col || ignored.count(name)) continue;
    if (one_hot.count(name)) {
      std::set<std::string> categories;
      for (const auto& row : table.rows) categories.insert(row[static_cast<std::size_t>(c)]);
      for (const auto& category : categories) {
        columns.push_back({c, category});
        out.feature_names.push_back(name + "=" + category);
      }
    } else {
      columns.push_back({c, std::nullopt});
      out.feature_names.push_back(name);
    }
  }

  const auto n = table.rows.size();
  out.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(columns.size()));
  std::vector<int> raw_labels(n);
  std::vector<int> truth(n);
  std::vector<int> tags(n);
  bool multi_class = false;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    for (std::size_t j = 0; j < columns.size(); ++j) {
      const auto& column = columns[j];
      const auto& text = row[static_cast<std::size_t>(column.source)];
      double value = 0.0;
      if (column.category) {
        value = text == *column.category ? 1.0 : 0.0;
      } else if (!csv::parse_number(text, value)) {
        throw InputError("row " + std::to_string(r + 1) + ": non-numeric value '" + text +
                         "' in column '" + table.header[static_cast<std::size_t>(column.source)] + "'");
      }
      out.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = value;
    }
    raw_labels[r] = parse_label(row[static_cast<std::size_t>(label_col)], r, "label");
    multi_class = multi_class || raw_labels[r] > 1;
    if (truth_col >= 0) {
      truth[r] = parse_label(row[static_cast<std::size_t>(truth_col)], r, "true_label");
      if (truth[r] > 1) throw InputError("true_label values must be 0 or 1");
    }
    if (subclass_col >= 0) tags[r] = parse_label(row[static_cast<std::size_t>(subclass_col)], r, "subclass");
  }

  for (std::size_t r = 0; r < n; ++r) out.pu_label.push_back(raw_labels[r] > 0 ? 1 : 0);
  if (truth_col >= 0) {
    out.true_label = truth;
  } else if (options.labels_are_truth) {
    out.true_label = out.pu_label;
  }
  if (subclass_col >= 0) {
    out.subclass = tags;
  } else if (multi_class) {
    out.subclass = raw_labels;
  }
  out.validate();
  return out;
}

void write_csv(const PUDataset& dataset, const std::filesystem::path& path,
               const std::vector<std::string>& preamble, char delimiter) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  for (const auto& line : preamble) out << "# " << line << '\n';
  for (std::size_t j = 0; j < dataset.n_features(); ++j) {
    out << (dataset.feature_names.empty() ? "f" + std::to_string(j) : dataset.feature_names[j])
        << delimiter;
  }
  out << "pu_label";
  if (dataset.true_label) out << delimiter << "true_label";
  if (dataset.subclass) out << delimiter << "subclass";
  out << '\n';
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    for (std::size_t j = 0; j < dataset.n_features(); ++j) {
      out << csv::format_number(dataset.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))
          << delimiter;
    }
    out << dataset.pu_label[i];
    if (dataset.true_label) out << delimiter << (*dataset.true_label)[i];
    if (dataset.subclass) out << delimiter << (*dataset.subclass)[i];
    out << '\n';
  }
  if (!out) throw InputError("failed writing '" + path.string() + "'");
}

std::size_t flip_count(std::size_t n_unlabeled, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw InputError("flip fraction must lie in (0, 1)");
  return round_count(fraction * static_cast<double>(n_unlabeled) / (1.0 - fraction));
}

PUDataset flip_to_unlabeled(const PUDataset& dataset, double fraction, LabelMode mode,
                            std::uint64_t seed) {
  if (!dataset.true_label) throw InputError("flip_to_unlabeled needs ground-truth labels");
  dataset.validate();
  const auto positives = dataset.labeled_indices();
  const std::size_t m = flip_count(dataset.n_unlabeled(), fraction);
  if (m >= positives.size()) {
    throw InputError("not enough positives: need " + std::to_string(m) + " of " +
                     std::to_string(positives.size()) + " while keeping some labeled");
  }
  Rng rng(seed);
  std::vector<std::size_t> chosen;
  if (mode == LabelMode::kScar) {
    for (auto i : rng.sample(positives.size(), m)) chosen.push_back(positives[i]);
  } else {
    if (!dataset.subclass) throw InputError("snar flipping needs subclass tags");
    std::map<int, std::vector<std::size_t>> groups;
    for (auto i : positives) groups[(*dataset.subclass)[i]].push_back(i);
    if (groups.size() < 2) throw InputError("snar flipping needs at least two positive subclasses");
    std::vector<int> by_size;
    for (const auto& [tag, rows] : groups) by_size.push_back(tag);
    std::stable_sort(by_size.begin(), by_size.end(),
                     [&](int a, int b) { return groups[a].size() > groups[b].size(); });
    std::vector<std::size_t> minor;
    for (std::size_t g = 2; g < by_size.size(); ++g) {
      const auto& rows = groups[by_size[g]];
      minor.insert(minor.end(), rows.begin(), rows.end());
    }
    const std::size_t from_minor = round_count(static_cast<double>(m) *
                                               static_cast<double>(minor.size()) /
                                               static_cast<double>(positives.size()));
    const std::size_t rest = m - from_minor;
    const std::size_t first = rest - rest / 2;
    const std::size_t second = rest / 2;
    auto draw = [&](const std::vector<std::size_t>& pool, std::size_t count) {
      if (count > pool.size()) {
        throw InputError("not enough positives in a subclass to reach the requested fraction");
      }
      for (auto i : rng.sample(pool.size(), count)) chosen.push_back(pool[i]);
    };
    draw(minor, from_minor);
    draw(groups[by_size[0]], first);
    draw(groups[by_size[1]], second);
  }
  PUDataset out = dataset;
  for (auto i : chosen) out.pu_label[i] = 0;
  out.seed = seed;
  return out;
}

}  // namespace puprior
