#pragma once

#include "puprior/optimize.hpp"

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace puprior {

inline constexpr double kMinBandwidth = 0.001;
inline constexpr double kMaxBandwidth = 0.5;
/// Probabilities are kept this far from 0 and 1 before density estimation.
inline constexpr double kProbabilityClip = 1e-6;

enum class BinRule { kSqrt, kSturges, kRice, kScott, kFd };

std::string_view to_string(BinRule rule);
BinRule parse_bin_rule(std::string_view text);

/// Number of equal-width bins over [0,1]. Scott and FD need `samples`; they
/// divide the sample range by their reference width and never return fewer
/// than 2 bins or more than the Rice count for the same n. FD falls back to
/// sqrt when the IQR is 0, Scott when the standard deviation is 0.
std::size_t bin_count(std::size_t n, BinRule rule, std::span<const double> samples = {});

/// Centers (i + 0.5) / n_bins of the equal-width bins.
std::vector<double> bin_centers(std::size_t n_bins);

struct DensityEstimate {
  std::vector<double> bin_centers;
  std::vector<double> values;
  std::size_t n_source = 0;

  [[nodiscard]] std::size_t n_bins() const { return values.size(); }
};

/// Trapezoid rule through the bin-center values, extended flat to 0 and 1.
double trapezoid_mass(const DensityEstimate& density);

/// Copies `probs` clamped to [kProbabilityClip, 1 - kProbabilityClip].
std::vector<double> clip_probabilities(std::span<const double> probs);

DensityEstimate histogram_density(std::span<const double> probs, std::size_t n_bins);

/// Beta-kernel density: the value at bin center z is the mean over samples x
/// of the Beta(1 + z/bw, 1 + (1 - z)/bw) PDF evaluated at x.
///
/// The estimator sorts the samples once and caches their logs, so repeated
/// evaluations at different bandwidths (as in bandwidth search) are cheap.
/// Samples whose log-kernel falls more than kTruncation below the kernel's
/// peak are skipped; the kernel is log-concave in x, so the skipped mass is
/// below n * exp(-kTruncation) of the peak.
class BetaKernelEstimator {
 public:
  static constexpr double kTruncation = 46.0;

  explicit BetaKernelEstimator(std::span<const double> probs);

  [[nodiscard]] double evaluate(double z, double bandwidth) const;
  [[nodiscard]] DensityEstimate density(double bandwidth, std::size_t n_bins) const;
  [[nodiscard]] std::size_t size() const { return x_.size(); }

 private:
  std::vector<double> x_;
  std::vector<double> log_x_;
  std::vector<double> log_1mx_;
};

DensityEstimate beta_kernel_density(std::span<const double> probs, double bandwidth,
                                    std::size_t n_bins);

enum class BandwidthObjective { kMse, kJensenShannon };

std::string_view to_string(BandwidthObjective objective);
BandwidthObjective parse_bandwidth_objective(std::string_view text);

/// Discrepancy between the histogram and a kernel estimate on the same bins.
/// Jensen-Shannon distance (natural log) normalizes both to unit sum first.
double bandwidth_loss(const DensityEstimate& histogram, const DensityEstimate& kernel,
                      BandwidthObjective objective);

struct BandwidthConfig {
  BandwidthObjective objective = BandwidthObjective::kMse;
  DifferentialEvolutionConfig optimizer{};
};

struct Bandwidth {
  double value = kMinBandwidth;
  double loss = 0.0;
  /// Constant input or a flat objective; `value` is then the lower bound.
  bool degenerate = false;
  OptimizeResult search{};
};

/// Bandwidth in [kMinBandwidth, kMaxBandwidth] minimizing the loss between
/// the histogram and the beta-kernel density. Needs at least 10 samples.
Bandwidth estimate_bandwidth(std::span<const double> probs, std::size_t n_bins,
                             const BandwidthConfig& config = {});

/// Loss of the kernel estimate at `bandwidth` against the histogram, computed
/// exactly as estimate_bandwidth scores candidates.
double bandwidth_objective(const BetaKernelEstimator& estimator, const DensityEstimate& histogram,
                           double bandwidth, BandwidthObjective objective);

/// CSV with columns bin_center,value.
void write_density_csv(const DensityEstimate& density, const std::filesystem::path& path,
                       const std::vector<std::string>& preamble = {});

}  // namespace puprior
