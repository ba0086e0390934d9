#include "puprior/metrics.hpp"

#include "puprior/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace puprior {
namespace {

void check(std::span<const double> probs, std::span<const int> truth) {
  if (probs.size() != truth.size()) throw InputError("probabilities and labels differ in length");
  if (probs.empty()) throw InputError("metrics need at least one example");
  for (int y : truth) {
    if (y != 0 && y != 1) throw InputError("true labels must be 0 or 1");
  }
  for (double p : probs) {
    if (!std::isfinite(p)) throw InputError("probabilities must be finite");
  }
}

std::vector<std::size_t> order_by_score(std::span<const double> probs, bool descending) {
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return descending ? probs[a] > probs[b] : probs[a] < probs[b];
  });
  return order;
}

}  // namespace

std::optional<double> roc_auc(std::span<const double> probs, std::span<const int> truth) {
  check(probs, truth);
  const auto n_pos = static_cast<double>(std::count(truth.begin(), truth.end(), 1));
  const double n_neg = static_cast<double>(truth.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) return std::nullopt;
  const auto order = order_by_score(probs, false);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && probs[order[j]] == probs[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);  // ranks i+1 .. j
    for (std::size_t t = i; t < j; ++t) {
      if (truth[order[t]] == 1) rank_sum += midrank;
    }
    i = j;
  }
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

double average_precision(std::span<const double> probs, std::span<const int> truth) {
  check(probs, truth);
  const auto n_pos = static_cast<double>(std::count(truth.begin(), truth.end(), 1));
  if (n_pos == 0.0) return 0.0;
  const auto order = order_by_score(probs, true);
  double tp = 0.0;
  double fp = 0.0;
  double prev_recall = 0.0;
  double ap = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && probs[order[j]] == probs[order[i]]) {
      (truth[order[j]] == 1 ? tp : fp) += 1.0;
      ++j;
    }
    const double recall = tp / n_pos;
    ap += (recall - prev_recall) * (tp / (tp + fp));
    prev_recall = recall;
    i = j;
  }
  return ap;
}

MetricsReport classification_metrics(std::span<const double> probs, std::span<const int> truth,
                                     double threshold) {
  check(probs, truth);
  MetricsReport out;
  out.threshold = threshold;
  double tp = 0.0;
  double tn = 0.0;
  double fp = 0.0;
  double fn = 0.0;
  double brier = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const bool predicted = probs[i] >= threshold;
    const bool actual = truth[i] == 1;
    if (predicted && actual) tp += 1.0;
    if (predicted && !actual) fp += 1.0;
    if (!predicted && actual) fn += 1.0;
    if (!predicted && !actual) tn += 1.0;
    const double d = probs[i] - truth[i];
    brier += d * d;
  }
  const auto n = static_cast<double>(probs.size());
  out.accuracy = (tp + tn) / n;
  out.brier = brier / n;
  out.f1 = (2.0 * tp + fp + fn) > 0.0 ? 2.0 * tp / (2.0 * tp + fp + fn) : 0.0;
  const bool both = (tp + fn) > 0.0 && (tn + fp) > 0.0;
  if (both) {
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    out.mcc = denom > 0.0 ? (tp * tn - fp * fn) / std::sqrt(denom) : 0.0;
  }
  out.auc_roc = roc_auc(probs, truth);
  out.average_precision = average_precision(probs, truth);
  return out;
}

}  // namespace puprior
