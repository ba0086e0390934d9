#include "puprior/pulscar.hpp"

#include "puprior/csv.hpp"
#include "puprior/types.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace puprior {

std::vector<double> alpha_grid(double step) {
  if (!(step > 0.0 && step <= 0.5)) throw InputError("grid step must lie in (0, 0.5]");
  const double count = 1.0 / step;
  const double steps = std::round(count);
  if (std::abs(count - steps) > 1e-6 * steps) {
    throw InputError("grid step must divide 1 into an integer number of steps");
  }
  const auto n = static_cast<std::size_t>(steps);
  std::vector<double> grid(n + 1);
  for (std::size_t j = 0; j <= n; ++j) grid[j] = static_cast<double>(j) / steps;
  return grid;
}

double min_gap(const DensityEstimate& unlabeled, const DensityEstimate& positive, double alpha) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < unlabeled.values.size(); ++i) {
    gap = std::min(gap, unlabeled.values[i] - alpha * positive.values[i]);
  }
  return gap;
}

ErrorCurve error_curve(const DensityEstimate& unlabeled, const DensityEstimate& positive,
                       const std::vector<double>& grid) {
  if (unlabeled.values.empty() || unlabeled.values.size() != positive.values.size() ||
      unlabeled.bin_centers != positive.bin_centers) {
    throw InputError("densities must share bin centers");
  }
  if (grid.size() < 3) throw InputError("alpha grid needs at least 3 points");
  ErrorCurve curve;
  curve.alphas = grid;
  const double min_pos = *std::min_element(positive.values.begin(), positive.values.end());
  curve.epsilon = std::abs(min_pos) != 0.0 ? std::abs(min_pos) : 1e-10;
  curve.values.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    curve.values[j] = std::log(std::abs(min_gap(unlabeled, positive, grid[j])) + curve.epsilon);
  }
  return curve;
}

SlopeSelection select_slope_change(const ErrorCurve& curve) {
  const auto n = curve.values.size();
  if (n < 3 || curve.alphas.size() != n) throw InputError("error curve needs at least 3 points");
  SlopeSelection out;
  out.slope.resize(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    out.slope[j] = (curve.values[j + 1] - curve.values[j]) / (curve.alphas[j + 1] - curve.alphas[j]);
  }
  out.slope_change.resize(n - 2);
  out.max_change = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j + 2 < n; ++j) {
    out.slope_change[j] = out.slope[j + 1] - out.slope[j];
    // Strict comparison keeps the first (smallest alpha) maximum.
    if (out.slope_change[j] > out.max_change) {
      out.max_change = out.slope_change[j];
      out.index = j;
    }
  }
  return out;
}

AlphaEstimate estimate_alpha_from_densities(const DensityEstimate& unlabeled,
                                            const DensityEstimate& positive, double grid_step) {
  AlphaEstimate est;
  est.n_bins = unlabeled.n_bins();
  est.density_unlabeled = unlabeled;
  est.density_positive = positive;
  est.curve = error_curve(unlabeled, positive, alpha_grid(grid_step));
  est.selection = select_slope_change(est.curve);
  const auto& grid = est.curve.alphas;
  if (!(est.selection.max_change > kMinSlopeChange)) {
    if (min_gap(unlabeled, positive, 1.0) >= 0.0) {
      est.saturated = true;
      est.grid_index = grid.size() - 1;
    } else {
      est.no_signal = true;
      est.grid_index = 0;
    }
  } else {
    est.grid_index = est.selection.index + 2;
  }
  est.alpha = grid[est.grid_index];
  est.gap_at_alpha = min_gap(unlabeled, positive, est.alpha);
  est.gap_beyond = min_gap(unlabeled, positive, grid[std::min(est.grid_index + 2, grid.size() - 1)]);
  return est;
}

AlphaEstimate estimate_alpha_scar(std::span<const double> probs_positive,
                                  std::span<const double> probs_unlabeled,
                                  const PulscarConfig& config, std::uint64_t optimizer_seed) {
  if (probs_positive.empty() || probs_unlabeled.empty()) {
    throw InputError("both probability vectors must be non-empty");
  }
  const auto pos = clip_probabilities(probs_positive);
  const auto unl = clip_probabilities(probs_unlabeled);
  std::vector<double> pooled = pos;
  pooled.insert(pooled.end(), unl.begin(), unl.end());

  const std::size_t n_bins = config.n_bins ? *config.n_bins
                                           : bin_count(pooled.size(), config.bin_rule, pooled);
  if (n_bins < 2) throw InputError("at least 2 bins are required");

  BandwidthConfig bw_config = config.bandwidth;
  bw_config.optimizer.seed = optimizer_seed;
  const auto bandwidth = estimate_bandwidth(pooled, n_bins, bw_config);

  auto est = estimate_alpha_from_densities(BetaKernelEstimator(unl).density(bandwidth.value, n_bins),
                                           BetaKernelEstimator(pos).density(bandwidth.value, n_bins),
                                           config.grid_step);
  est.bandwidth = bandwidth;
  return est;
}

void write_curve_csv(const AlphaEstimate& estimate, const std::filesystem::path& path,
                     const std::vector<std::string>& preamble) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  for (const auto& line : preamble) out << "# " << line << '\n';
  out << "alpha,f_alpha,slope\n";
  const auto& c = estimate.curve;
  for (std::size_t j = 0; j < c.values.size(); ++j) {
    out << csv::format_number(c.alphas[j]) << ',' << csv::format_number(c.values[j]) << ',';
    if (j < estimate.selection.slope.size()) out << csv::format_number(estimate.selection.slope[j]);
    out << '\n';
  }
}

}  // namespace puprior
