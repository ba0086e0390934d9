#pragma once

#include "puprior/density.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace puprior {

/// 0, step, 2*step, ..., 1. `1/step` must be (close to) an integer.
std::vector<double> alpha_grid(double step = 1e-4);

struct ErrorCurve {
  std::vector<double> alphas;
  /// log(|min_i(D_u[i] - alpha * D_p[i])| + epsilon) per alpha.
  std::vector<double> values;
  double epsilon = 1e-10;
};

/// The smallest density gap min_i(D_u[i] - alpha * D_p[i]).
double min_gap(const DensityEstimate& unlabeled, const DensityEstimate& positive, double alpha);

ErrorCurve error_curve(const DensityEstimate& unlabeled, const DensityEstimate& positive,
                       const std::vector<double>& grid);

/// Finite-difference view of an error curve: slope[j] is the forward
/// difference quotient between grid points j and j+1, and slope_change[j]
/// the difference slope[j+1] - slope[j]. The selected alpha is
/// alphas[index + 2]: the second difference drops the first two grid points.
struct SlopeSelection {
  std::vector<double> slope;
  std::vector<double> slope_change;
  /// First index of the largest slope change.
  std::size_t index = 0;
  double max_change = 0.0;
};

SlopeSelection select_slope_change(const ErrorCurve& curve);

/// Slope changes at or below this are treated as a flat curve.
inline constexpr double kMinSlopeChange = 1e-12;

struct PulscarConfig {
  BinRule bin_rule = BinRule::kFd;
  /// Overrides the bin rule when set.
  std::optional<std::size_t> n_bins;
  double grid_step = 1e-4;
  BandwidthConfig bandwidth{};
};

struct AlphaEstimate {
  double alpha = 0.0;
  /// Grid index of `alpha`.
  std::size_t grid_index = 0;
  ErrorCurve curve;
  SlopeSelection selection;
  Bandwidth bandwidth;
  std::size_t n_bins = 0;
  DensityEstimate density_positive;
  DensityEstimate density_unlabeled;
  /// Gap min(D_u - alpha D_p) at the estimate and two grid steps beyond it.
  double gap_at_alpha = 0.0;
  double gap_beyond = 0.0;
  /// The curve had no slope change; alpha is 0 because D_u dips below D_p
  /// somewhere (no positive component can be fitted).
  bool no_signal = false;
  /// The curve had no slope change and D_u >= D_p everywhere: the unlabeled
  /// density is indistinguishable from the positive one, so alpha is 1.
  bool saturated = false;
};

/// Selects alpha from fixed densities; the bandwidth field is left default.
AlphaEstimate estimate_alpha_from_densities(const DensityEstimate& unlabeled,
                                            const DensityEstimate& positive,
                                            double grid_step = 1e-4);

/// Full pipeline: clip probabilities, choose the bin count from the pooled
/// vector, fit one bandwidth on the pooled vector, build both beta-kernel
/// densities and select alpha from the error curve.
AlphaEstimate estimate_alpha_scar(std::span<const double> probs_positive,
                                  std::span<const double> probs_unlabeled,
                                  const PulscarConfig& config, std::uint64_t optimizer_seed);

/// CSV with columns alpha,f_alpha,slope. The last row has no forward slope.
void write_curve_csv(const AlphaEstimate& estimate, const std::filesystem::path& path,
                     const std::vector<std::string>& preamble = {});

}  // namespace puprior
