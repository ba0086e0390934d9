#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

namespace puprior {

struct DifferentialEvolutionConfig {
  std::size_t population = 20;
  std::size_t max_generations = 200;
  double mutation = 0.6;
  double crossover = 0.8;
  /// Stop once max - min of the population positions falls below this.
  double tolerance = 1e-6;
  /// Refine the best member with a bounded golden-section search afterwards.
  bool polish = true;
  std::uint64_t seed = 0;
};

struct OptimizeResult {
  double argmin = 0.0;
  double value = 0.0;
  std::size_t generations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  /// Every evaluated point had the same objective value.
  bool degenerate = false;
};

/// Minimizes a scalar function over [lo, hi] with rand/1/bin differential
/// evolution. Throws NumericalError if the objective returns a non-finite
/// value anywhere it is evaluated.
OptimizeResult differential_evolution(const std::function<double(double)>& objective, double lo,
                                      double hi, const DifferentialEvolutionConfig& config = {});

/// Golden-section search on [lo, hi] for a unimodal function.
OptimizeResult golden_section(const std::function<double(double)>& objective, double lo,
                              double hi, double tolerance = 1e-10, std::size_t max_iter = 200);

}  // namespace puprior
