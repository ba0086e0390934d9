#include "puprior/optimize.hpp"

#include "puprior/rng.hpp"
#include "puprior/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace puprior {
namespace {

class CountingObjective {
 public:
  explicit CountingObjective(const std::function<double(double)>& f) : f_(f) {}

  double operator()(double x) {
    const double v = f_(x);
    if (!std::isfinite(v)) {
      throw NumericalError("objective is not finite at x = " + std::to_string(x));
    }
    ++evaluations_;
    lowest_ = std::min(lowest_, v);
    highest_ = std::max(highest_, v);
    return v;
  }

  [[nodiscard]] std::size_t evaluations() const { return evaluations_; }
  [[nodiscard]] bool flat() const { return evaluations_ > 0 && lowest_ == highest_; }

 private:
  const std::function<double(double)>& f_;
  std::size_t evaluations_ = 0;
  double lowest_ = std::numeric_limits<double>::infinity();
  double highest_ = -std::numeric_limits<double>::infinity();
};

OptimizeResult golden(CountingObjective& f, double lo, double hi, double tolerance,
                      std::size_t max_iter) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  OptimizeResult best{c, fc};
  if (fd < best.value) best = {d, fd};
  std::size_t iter = 0;
  while (b - a > tolerance && iter < max_iter) {
    ++iter;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
      if (fc < best.value) best = {c, fc};
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
      if (fd < best.value) best = {d, fd};
    }
  }
  best.generations = iter;
  best.converged = b - a <= tolerance;
  return best;
}

}  // namespace

OptimizeResult golden_section(const std::function<double(double)>& objective, double lo,
                              double hi, double tolerance, std::size_t max_iter) {
  if (!(lo < hi)) throw InputError("golden_section needs lo < hi");
  CountingObjective f(objective);
  auto result = golden(f, lo, hi, tolerance, max_iter);
  result.evaluations = f.evaluations();
  result.degenerate = f.flat();
  return result;
}

OptimizeResult differential_evolution(const std::function<double(double)>& objective, double lo,
                                      double hi, const DifferentialEvolutionConfig& config) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw InputError("differential_evolution needs finite bounds with lo < hi");
  }
  if (config.population < 4) throw InputError("population must be at least 4");
  if (!(config.mutation > 0.0) || config.crossover < 0.0 || config.crossover > 1.0) {
    throw InputError("invalid mutation or crossover rate");
  }

  CountingObjective f(objective);
  Rng rng(config.seed);
  const std::size_t n = config.population;
  const double width = hi - lo;

  // Stratified initial population: one member per equal slice of the bounds.
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = lo + width * (static_cast<double>(i) + rng.uniform()) / static_cast<double>(n);
  }
  rng.shuffle(std::span<double>(x));
  std::vector<double> fx(n);
  for (std::size_t i = 0; i < n; ++i) fx[i] = f(x[i]);

  OptimizeResult result;
  auto spread = [&] {
    const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
    return *mx - *mn;
  };
  result.converged = spread() < config.tolerance;
  while (!result.converged && result.generations < config.max_generations) {
    ++result.generations;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t r[3];
      for (std::size_t k = 0; k < 3; ++k) {
        do {
          r[k] = rng.below(n);
        } while (r[k] == i || (k > 0 && r[k] == r[0]) || (k > 1 && r[k] == r[1]));
      }
      // With a single coordinate the binomial crossover always keeps the
      // mutant coordinate, but the draw is made to keep the stream layout
      // identical to the multi-dimensional scheme.
      (void)(rng.uniform() < config.crossover);
      double trial = x[r[0]] + config.mutation * (x[r[1]] - x[r[2]]);
      if (trial < lo || trial > hi) trial = lo + width * rng.uniform();
      const double ft = f(trial);
      if (ft <= fx[i]) {
        x[i] = trial;
        fx[i] = ft;
      }
    }
    result.converged = spread() < config.tolerance;
  }

  const auto best = static_cast<std::size_t>(std::min_element(fx.begin(), fx.end()) - fx.begin());
  result.argmin = x[best];
  result.value = fx[best];

  if (config.polish) {
    const double radius = std::max(10.0 * spread(), 1e-3 * width);
    const double a = std::max(lo, result.argmin - radius);
    const double b = std::min(hi, result.argmin + radius);
    if (a < b) {
      const auto refined = golden(f, a, b, 1e-12 * width, 200);
      if (refined.value < result.value) {
        result.argmin = refined.argmin;
        result.value = refined.value;
      }
    }
  }
  result.evaluations = f.evaluations();
  result.degenerate = f.flat();
  return result;
}

}  // namespace puprior
