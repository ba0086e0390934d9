#pragma once

// Independent reference implementations. Each follows the textbook definition
// as directly as possible and shares no code with the library.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace oracle {

struct Confusion {
  double tp = 0, fp = 0, tn = 0, fn = 0;
};

inline Confusion confusion(std::span<const double> p, std::span<const int> y, double threshold) {
  Confusion c;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const bool predicted = p[i] >= threshold;
    if (predicted && y[i] == 1) c.tp += 1;
    if (predicted && y[i] == 0) c.fp += 1;
    if (!predicted && y[i] == 0) c.tn += 1;
    if (!predicted && y[i] == 1) c.fn += 1;
  }
  return c;
}

inline double accuracy(std::span<const double> p, std::span<const int> y, double t = 0.5) {
  const auto c = confusion(p, y, t);
  return (c.tp + c.tn) / static_cast<double>(p.size());
}

inline double brier(std::span<const double> p, std::span<const int> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += (p[i] - y[i]) * (p[i] - y[i]);
  return s / static_cast<double>(p.size());
}

// F1 = 2TP / (2TP + FP + FN); 0 when nothing is predicted or present.
inline double f1(std::span<const double> p, std::span<const int> y, double t = 0.5) {
  const auto c = confusion(p, y, t);
  const double d = 2 * c.tp + c.fp + c.fn;
  return d == 0 ? 0.0 : 2 * c.tp / d;
}

inline std::optional<double> mcc(std::span<const double> p, std::span<const int> y,
                                 double t = 0.5) {
  const auto c = confusion(p, y, t);
  if (c.tp + c.fn == 0 || c.tn + c.fp == 0) return std::nullopt;
  const double d = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn);
  if (d == 0) return 0.0;
  return (c.tp * c.tn - c.fp * c.fn) / std::sqrt(d);
}

// Probability that a random positive outscores a random negative, ties half.
inline std::optional<double> auc(std::span<const double> p, std::span<const int> y) {
  double wins = 0, pairs = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1;
      if (p[i] > p[j]) wins += 1;
      if (p[i] == p[j]) wins += 0.5;
    }
  }
  if (pairs == 0) return std::nullopt;
  return wins / pairs;
}

// Sum over distinct thresholds (descending) of precision * recall increment.
inline double average_precision(std::span<const double> p, std::span<const int> y) {
  double positives = 0;
  for (int v : y) positives += v;
  if (positives == 0) return 0.0;
  std::vector<double> thresholds(p.begin(), p.end());
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    const auto c = confusion(p, y, t);
    const double recall = c.tp / positives;
    const double precision = c.tp / (c.tp + c.fp);
    ap += precision * (recall - prev_recall);
    prev_recall = recall;
  }
  return ap;
}

// Selected index by scanning every second difference of the curve directly.
// Returns nullopt when no change exceeds `floor`.
inline std::optional<std::size_t> second_difference_argmax(const std::vector<double>& alphas,
                                                           const std::vector<double>& f,
                                                           double floor) {
  std::optional<std::size_t> best;
  double best_value = floor;
  for (std::size_t j = 0; j + 2 < f.size(); ++j) {
    const double d0 = (f[j + 1] - f[j]) / (alphas[j + 1] - alphas[j]);
    const double d1 = (f[j + 2] - f[j + 1]) / (alphas[j + 2] - alphas[j + 1]);
    if (d1 - d0 > best_value) {
      best_value = d1 - d0;
      best = j;
    }
  }
  return best;
}

// Least-squares non-decreasing fit of y (already ordered by distinct scores):
// the optimum is the block means of some partition into consecutive runs, so
// enumerate all 2^(n-1) partitions.
inline std::vector<double> isotonic_brute_force(const std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> best;
  double best_sse = std::numeric_limits<double>::infinity();
  for (unsigned long mask = 0; mask < (1UL << (n - 1)); ++mask) {
    std::vector<double> fit(n);
    std::size_t start = 0;
    bool monotone = true;
    double last = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const bool cut = i + 1 == n || ((mask >> i) & 1UL);
      if (!cut) continue;
      double mean = 0;
      for (std::size_t j = start; j <= i; ++j) mean += y[j];
      mean /= static_cast<double>(i - start + 1);
      if (mean < last - 1e-15) monotone = false;
      last = mean;
      for (std::size_t j = start; j <= i; ++j) fit[j] = mean;
      start = i + 1;
    }
    if (!monotone) continue;
    double sse = 0;
    for (std::size_t i = 0; i < n; ++i) sse += (fit[i] - y[i]) * (fit[i] - y[i]);
    if (sse < best_sse - 1e-15) {
      best_sse = sse;
      best = fit;
    }
  }
  return best;
}

// Plain gradient descent on the ridge-penalized logistic log-loss in
// (slope, intercept), with backtracking.
inline std::pair<double, double> logistic_gradient_descent(std::span<const double> x,
                                                           std::span<const int> y, double ridge,
                                                           std::size_t iterations = 200000) {
  auto loss = [&](double a, double b) {
    double l = 0.5 * ridge * (a * a + b * b);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double m = a * x[i] + b;
      l += std::log1p(std::exp(-std::abs(m))) + std::max(m, 0.0) - y[i] * m;
    }
    return l;
  };
  double a = 0, b = 0, step = 1.0;
  for (std::size_t it = 0; it < iterations; ++it) {
    double ga = ridge * a, gb = ridge * b;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = 1.0 / (1.0 + std::exp(-(a * x[i] + b))) - y[i];
      ga += r * x[i];
      gb += r;
    }
    if (std::hypot(ga, gb) < 1e-12) break;
    const double current = loss(a, b);
    step = std::min(step * 2.0, 10.0);
    while (loss(a - step * ga, b - step * gb) > current - 0.5 * step * (ga * ga + gb * gb)) {
      step *= 0.5;
      if (step < 1e-14) break;
    }
    a -= step * ga;
    b -= step * gb;
  }
  return {a, b};
}

// Beta(a, b) density at x from the gamma-function definition.
inline double beta_pdf(double x, double a, double b) {
  return std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + (a - 1) * std::log(x) +
                  (b - 1) * std::log1p(-x));
}

// Perpendicular distance below the chord of the min-max normalized curve.
inline std::size_t chord_knee(const std::vector<double>& values) {
  const std::size_t n = values.size();
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  double best = -1;
  std::size_t index = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(n - 1);
    const double y = (values[i] - *lo) / range;
    const double y0 = (values.front() - *lo) / range;
    const double y1 = (values.back() - *lo) / range;
    const double chord = y0 + (y1 - y0) * x;
    const double distance = (chord - y) / std::hypot(1.0, y1 - y0);
    if (distance > best) {
      best = distance;
      index = i;
    }
  }
  return index;
}

}  // namespace oracle
