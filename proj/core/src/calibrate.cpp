#include "puprior/calibrate.hpp"

#include "puprior/classifier.hpp"
#include "puprior/csv.hpp"
#include "puprior/dataset.hpp"
#include "puprior/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace puprior {
namespace {

std::size_t bin_of(double p, std::size_t n_bins) {
  const double clamped = std::clamp(p, 0.0, 1.0);
  return std::min(n_bins - 1, static_cast<std::size_t>(clamped * static_cast<double>(n_bins)));
}

void check_binary(std::span<const int> labels) {
  for (int y : labels) {
    if (y != 0 && y != 1) throw InputError("labels must be 0 or 1");
  }
}

void check_scores(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InputError("scores and labels differ in length");
  if (scores.empty()) throw InputError("calibration needs at least one example");
  for (double s : scores) {
    if (!std::isfinite(s)) throw InputError("scores must be finite");
  }
  check_binary(labels);
}

}  // namespace

FlipResult build_flip_schedule(std::span<const double> probs_unlabeled,
                               std::span<const double> probs_positive, double alpha,
                               std::size_t n_bins, std::uint64_t seed, bool strict_pseudocode) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw InputError("alpha must lie in [0, 1]");
  if (n_bins < 1) throw InputError("flip schedule needs at least one bin");
  if (probs_positive.empty()) throw InputError("flip schedule needs labeled positives");
  const std::size_t n_unl = probs_unlabeled.size();

  FlipResult out;
  auto& s = out.schedule;
  s.n_bins = n_bins;
  s.target.assign(n_bins, 0);
  s.available.assign(n_bins, 0);
  s.realized.assign(n_bins, 0);
  s.carried_in.assign(n_bins, 0);

  std::vector<std::size_t> pos_counts(n_bins, 0);
  for (double p : probs_positive) ++pos_counts[bin_of(p, n_bins)];
  std::vector<std::vector<std::size_t>> members(n_bins);
  for (std::size_t i = 0; i < n_unl; ++i) members[bin_of(probs_unlabeled[i], n_bins)].push_back(i);
  for (std::size_t b = 0; b < n_bins; ++b) s.available[b] = members[b].size();

  const double flips = alpha * static_cast<double>(n_unl);
  const std::size_t n_pos = probs_positive.size();
  if (strict_pseudocode) {
    // alpha |U| times the histogram density, without the bin width.
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double density = static_cast<double>(pos_counts[b]) * static_cast<double>(n_bins) /
                             static_cast<double>(n_pos);
      s.target[b] = round_count(flips * density);
    }
    s.total = std::min(n_unl, std::accumulate(s.target.begin(), s.target.end(), std::size_t{0}));
  } else {
    // Exact integer largest-remainder split of the total by positive counts.
    s.total = round_count(flips);
    std::vector<std::size_t> rem(n_bins);
    std::size_t assigned = 0;
    for (std::size_t b = 0; b < n_bins; ++b) {
      s.target[b] = s.total * pos_counts[b] / n_pos;
      rem[b] = s.total * pos_counts[b] % n_pos;
      assigned += s.target[b];
    }
    std::vector<std::size_t> order(n_bins);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t j = 0; assigned < s.total; ++j, ++assigned) ++s.target[order[j]];
  }

  out.labels.assign(n_unl, 0);
  Rng rng(seed);
  std::size_t carry = 0;
  std::size_t remaining = s.total;
  for (std::size_t b = n_bins; b-- > 0;) {
    s.carried_in[b] = carry;
    const std::size_t need = std::min(s.target[b] + carry, remaining);
    const std::size_t take = std::min(need, s.available[b]);
    for (std::size_t pick : rng.sample(members[b].size(), take)) {
      const auto row = members[b][pick];
      out.labels[row] = 1;
      out.flipped.push_back(row);
    }
    s.realized[b] = take;
    remaining -= take;
    carry = need - take;
  }
  if (remaining > 0) {
    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < n_unl; ++i) {
      if (out.labels[i] == 0) rest.push_back(i);
    }
    std::stable_sort(rest.begin(), rest.end(), [&](std::size_t a, std::size_t b) {
      return probs_unlabeled[a] > probs_unlabeled[b];
    });
    for (std::size_t j = 0; j < remaining; ++j) {
      out.labels[rest[j]] = 1;
      out.flipped.push_back(rest[j]);
      ++s.realized[bin_of(probs_unlabeled[rest[j]], n_bins)];
    }
    s.bottom_fallback = remaining;
  }
  return out;
}

double IsotonicCalibrator::predict(double score) const {
  if (knots_.empty()) throw InputError("isotonic calibrator is not fitted");
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), score);
  if (it == knots_.begin()) return values_.front();
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

Probabilities IsotonicCalibrator::predict(std::span<const double> scores) const {
  Probabilities out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = predict(scores[i]);
  return out;
}

IsotonicCalibrator fit_isotonic(std::span<const double> scores, std::span<const int> labels) {
  check_scores(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  struct Block {
    double first_score;
    double sum;
    double weight;
  };
  std::vector<Block> blocks;
  for (std::size_t i : order) {
    const double y = labels[i];
    if (!blocks.empty() && blocks.back().first_score == scores[i]) {
      blocks.back().sum += y;
      blocks.back().weight += 1.0;
    } else {
      blocks.push_back({scores[i], y, 1.0});
    }
  }
  // Knots are the tie-pooled scores; PAVA merges runs of them.
  std::vector<double> knots;
  knots.reserve(blocks.size());
  for (const auto& b : blocks) knots.push_back(b.first_score);
  std::vector<std::size_t> run_start;
  std::vector<Block> stack;
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    stack.push_back(blocks[j]);
    run_start.push_back(j);
    while (stack.size() > 1 && stack[stack.size() - 2].sum * stack.back().weight >
                                   stack.back().sum * stack[stack.size() - 2].weight) {
      auto top = stack.back();
      stack.pop_back();
      run_start.pop_back();
      stack.back().sum += top.sum;
      stack.back().weight += top.weight;
    }
  }
  std::vector<double> values(knots.size());
  for (std::size_t r = 0; r < stack.size(); ++r) {
    const auto end = r + 1 < stack.size() ? run_start[r + 1] : knots.size();
    for (std::size_t j = run_start[r]; j < end; ++j) values[j] = stack[r].sum / stack[r].weight;
  }
  return {std::move(knots), std::move(values)};
}

double SigmoidCalibrator::predict(double score) const {
  return logistic(slope_ * score + intercept_);
}

Probabilities SigmoidCalibrator::predict(std::span<const double> scores) const {
  Probabilities out(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = predict(scores[i]);
  return out;
}

double sigmoid_objective(std::span<const double> scores, std::span<const int> labels,
                         double slope, double intercept, double ridge) {
  double loss = 0.5 * ridge * (slope * slope + intercept * intercept);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double m = slope * scores[i] + intercept;
    // log(1 + e^m) - y m, computed without overflow.
    const double softplus = m > 0.0 ? m + std::log1p(std::exp(-m)) : std::log1p(std::exp(m));
    loss += softplus - labels[i] * m;
  }
  return loss;
}

SigmoidCalibrator fit_sigmoid(std::span<const double> scores, std::span<const int> labels,
                              double ridge) {
  check_scores(scores, labels);
  if (!(ridge > 0.0)) throw InputError("ridge must be positive");
  double a = 0.0;
  double b = 0.0;
  double f = sigmoid_objective(scores, labels, a, b, ridge);
  for (int iter = 0; iter < 200; ++iter) {
    double ga = ridge * a;
    double gb = ridge * b;
    double haa = ridge;
    double hab = 0.0;
    double hbb = ridge;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      const double p = logistic(a * scores[i] + b);
      const double r = p - labels[i];
      const double w = p * (1.0 - p);
      ga += r * scores[i];
      gb += r;
      haa += w * scores[i] * scores[i];
      hab += w * scores[i];
      hbb += w;
    }
    const double det = haa * hbb - hab * hab;
    double da = 0.0;
    double db = 0.0;
    if (det > 0.0 && std::isfinite(det)) {
      da = -(hbb * ga - hab * gb) / det;
      db = -(haa * gb - hab * ga) / det;
    } else {
      da = -ga / haa;
      db = -gb / hbb;
    }
    double step = 1.0;
    double next = f;
    bool improved = false;
    for (int ls = 0; ls < 60; ++ls) {
      next = sigmoid_objective(scores, labels, a + step * da, b + step * db, ridge);
      if (next <= f + 1e-4 * step * (ga * da + gb * db)) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
    a += step * da;
    b += step * db;
    const double change = f - next;
    f = next;
    if (std::abs(step * da) + std::abs(step * db) < 1e-12 ||
        change <= 1e-15 * std::max(1.0, std::abs(f))) {
      break;
    }
  }
  return {a, b};
}

std::string_view to_string(CalibrationMethod method) {
  return method == CalibrationMethod::kIsotonic ? "isotonic" : "sigmoid";
}

std::string_view to_string(CalibrationScope scope) {
  return scope == CalibrationScope::kPU ? "pu" : "u";
}

CalibrationMethod parse_calibration_method(std::string_view text) {
  if (text == "isotonic") return CalibrationMethod::kIsotonic;
  if (text == "sigmoid") return CalibrationMethod::kSigmoid;
  throw InputError("unknown calibration method '" + std::string(text) + "'");
}

CalibrationScope parse_calibration_scope(std::string_view text) {
  if (text == "pu" || text == "PU") return CalibrationScope::kPU;
  if (text == "u" || text == "U") return CalibrationScope::kU;
  throw InputError("unknown calibration scope '" + std::string(text) + "'");
}

CalibrationResult calibrate(std::span<const double> probs, std::span<const int> pu_labels,
                            double alpha, const CalibrationConfig& config) {
  if (probs.size() != pu_labels.size()) throw InputError("probabilities and labels differ in length");
  check_binary(pu_labels);
  std::vector<std::size_t> unl_rows;
  std::vector<double> p_unl;
  std::vector<double> p_pos;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (pu_labels[i] == 1) {
      p_pos.push_back(probs[i]);
    } else {
      unl_rows.push_back(i);
      p_unl.push_back(probs[i]);
    }
  }
  if (p_unl.empty()) throw InputError("calibration needs unlabeled examples");

  CalibrationResult out;
  out.method = config.method;
  out.scope = config.scope;
  out.flips = build_flip_schedule(p_unl, p_pos, alpha, config.n_bins, config.seed,
                                  config.strict_pseudocode);

  std::vector<double> fit_scores;
  Labels fit_labels;
  if (config.scope == CalibrationScope::kPU) {
    Labels updated(pu_labels.begin(), pu_labels.end());
    for (std::size_t j = 0; j < unl_rows.size(); ++j) updated[unl_rows[j]] = out.flips.labels[j];
    fit_scores.assign(probs.begin(), probs.end());
    fit_labels = std::move(updated);
    out.rows.resize(probs.size());
    std::iota(out.rows.begin(), out.rows.end(), std::size_t{0});
  } else {
    fit_scores = p_unl;
    fit_labels = out.flips.labels;
    out.rows = unl_rows;
  }

  if (config.method == CalibrationMethod::kIsotonic) {
    out.probabilities = fit_isotonic(fit_scores, fit_labels).predict(fit_scores);
  } else {
    out.probabilities = fit_sigmoid(fit_scores, fit_labels).predict(fit_scores);
  }
  return out;
}

Probabilities combine_cluster_probs(const std::vector<Probabilities>& per_cluster) {
  if (per_cluster.empty()) throw InputError("no cluster probabilities to combine");
  const auto n = per_cluster.front().size();
  Probabilities keep(n, 1.0);
  for (const auto& probs : per_cluster) {
    if (probs.size() != n) throw InputError("cluster probability vectors differ in length");
    for (std::size_t i = 0; i < n; ++i) keep[i] *= 1.0 - std::clamp(probs[i], 0.0, 1.0);
  }
  for (double& v : keep) v = 1.0 - v;
  return keep;
}

ReliabilityDiagram reliability_diagram(std::span<const double> probs, std::span<const int> truth,
                                       std::size_t n_bins) {
  if (probs.size() != truth.size()) throw InputError("probabilities and labels differ in length");
  if (n_bins < 1) throw InputError("reliability diagram needs at least one bin");
  check_binary(truth);
  std::vector<double> sum_p(n_bins, 0.0);
  std::vector<double> sum_y(n_bins, 0.0);
  std::vector<std::size_t> count(n_bins, 0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto b = bin_of(probs[i], n_bins);
    sum_p[b] += probs[i];
    sum_y[b] += truth[i];
    ++count[b];
  }
  ReliabilityDiagram out;
  for (std::size_t b = 0; b < n_bins; ++b) {
    if (count[b] == 0) continue;
    const auto c = static_cast<double>(count[b]);
    out.bins.push_back({(static_cast<double>(b) + 0.5) / static_cast<double>(n_bins),
                        sum_p[b] / c, sum_y[b] / c, count[b]});
  }
  double w = 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (const auto& bin : out.bins) {
    const auto c = static_cast<double>(bin.count);
    w += c;
    mx += c * bin.mean_predicted;
    my += c * bin.fraction_true;
  }
  if (w > 0.0) {
    mx /= w;
    my /= w;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& bin : out.bins) {
      const auto c = static_cast<double>(bin.count);
      sxx += c * (bin.mean_predicted - mx) * (bin.mean_predicted - mx);
      sxy += c * (bin.mean_predicted - mx) * (bin.fraction_true - my);
    }
    if (sxx > 0.0) {
      out.slope = sxy / sxx;
      out.intercept = my - *out.slope * mx;
    }
  }
  return out;
}

void write_reliability_csv(const ReliabilityDiagram& diagram, const std::filesystem::path& path,
                           const std::vector<std::string>& preamble) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  for (const auto& line : preamble) out << "# " << line << '\n';
  out << "bin_center,mean_predicted,fraction_true\n";
  for (const auto& bin : diagram.bins) {
    out << csv::format_number(bin.bin_center) << ',' << csv::format_number(bin.mean_predicted)
        << ',' << csv::format_number(bin.fraction_true) << '\n';
  }
}

}  // namespace puprior
