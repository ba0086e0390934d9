#include "puprior/density.hpp"

#include "puprior/csv.hpp"
#include "puprior/types.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace puprior {
namespace {

// Linear-interpolation percentile on sorted data (numpy's default method).
double percentile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::size_t bins_from_width(double range, double width) {
  const double bins = std::ceil(range / width);
  if (!std::isfinite(bins)) throw NumericalError("bin width rule produced a non-finite count");
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::min(bins, 1e9)));
}

void check_probabilities(std::span<const double> probs) {
  if (probs.empty()) throw InputError("density estimation needs at least one sample");
  for (double p : probs) {
    if (!(p >= 0.0 && p <= 1.0)) throw InputError("probabilities must lie in [0, 1]");
  }
}

}  // namespace

std::string_view to_string(BinRule rule) {
  switch (rule) {
    case BinRule::kSqrt: return "sqrt";
    case BinRule::kSturges: return "sturges";
    case BinRule::kRice: return "rice";
    case BinRule::kScott: return "scott";
    case BinRule::kFd: return "fd";
  }
  return "fd";
}

BinRule parse_bin_rule(std::string_view text) {
  for (auto rule : {BinRule::kSqrt, BinRule::kSturges, BinRule::kRice, BinRule::kScott,
                    BinRule::kFd}) {
    if (text == to_string(rule)) return rule;
  }
  throw InputError("unknown bin rule '" + std::string(text) + "'");
}

std::size_t bin_count(std::size_t n, BinRule rule, std::span<const double> samples) {
  if (n < 2) throw InputError("bin_count needs at least 2 samples");
  const double dn = static_cast<double>(n);
  switch (rule) {
    case BinRule::kSqrt:
      return static_cast<std::size_t>(std::ceil(std::sqrt(dn)));
    case BinRule::kSturges:
      return static_cast<std::size_t>(std::ceil(std::log2(dn))) + 1;
    case BinRule::kRice:
      // cbrt(1000) is exact, but guard against values a hair above an integer.
      return static_cast<std::size_t>(std::ceil(2.0 * std::cbrt(dn) - 1e-9));
    case BinRule::kScott:
    case BinRule::kFd: {
      if (samples.size() < 2) throw InputError("scott and fd rules need the samples");
      std::vector<double> sorted(samples.begin(), samples.end());
      std::sort(sorted.begin(), sorted.end());
      const double range = sorted.back() - sorted.front();
      const double scale = std::pow(static_cast<double>(sorted.size()), -1.0 / 3.0);
      // Unlabeled scores crowd near 0, which shrinks the spread estimate and
      // would ask for thousands of bins; the bandwidth fitted against that
      // histogram then collapses to its lower bound.
      const std::size_t rice = bin_count(n, BinRule::kRice);
      if (rule == BinRule::kFd) {
        const double iqr = percentile(sorted, 0.75) - percentile(sorted, 0.25);
        if (!(iqr > 0.0)) return bin_count(n, BinRule::kSqrt);
        return std::min(bins_from_width(range, 2.0 * iqr * scale), rice);
      }
      const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) /
                          static_cast<double>(sorted.size());
      double ss = 0.0;
      for (double v : sorted) ss += (v - mean) * (v - mean);
      const double sd = std::sqrt(ss / static_cast<double>(sorted.size()));
      if (!(sd > 0.0)) return bin_count(n, BinRule::kSqrt);
      return std::min(bins_from_width(range, 3.49 * sd * scale), rice);
    }
  }
  throw InputError("unknown bin rule");
}

std::vector<double> bin_centers(std::size_t n_bins) {
  std::vector<double> centers(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    centers[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n_bins);
  }
  return centers;
}

double trapezoid_mass(const DensityEstimate& density) {
  const auto& z = density.bin_centers;
  const auto& v = density.values;
  if (z.empty()) return 0.0;
  double mass = z.front() * v.front() + (1.0 - z.back()) * v.back();
  for (std::size_t i = 1; i < z.size(); ++i) mass += 0.5 * (v[i] + v[i - 1]) * (z[i] - z[i - 1]);
  return mass;
}

std::vector<double> clip_probabilities(std::span<const double> probs) {
  std::vector<double> out(probs.begin(), probs.end());
  for (double& p : out) p = std::clamp(p, kProbabilityClip, 1.0 - kProbabilityClip);
  return out;
}

DensityEstimate histogram_density(std::span<const double> probs, std::size_t n_bins) {
  check_probabilities(probs);
  if (n_bins < 2) throw InputError("histogram needs at least 2 bins");
  DensityEstimate out{bin_centers(n_bins), std::vector<double>(n_bins, 0.0), probs.size()};
  for (double p : probs) {
    const auto bin = std::min(n_bins - 1, static_cast<std::size_t>(p * static_cast<double>(n_bins)));
    out.values[bin] += 1.0;
  }
  const double scale = static_cast<double>(n_bins) / static_cast<double>(probs.size());
  for (double& v : out.values) v *= scale;
  return out;
}

BetaKernelEstimator::BetaKernelEstimator(std::span<const double> probs)
    : x_(probs.begin(), probs.end()) {
  check_probabilities(probs);
  std::sort(x_.begin(), x_.end());
  log_x_.resize(x_.size());
  log_1mx_.resize(x_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) {
    log_x_[i] = std::log(x_[i]);
    log_1mx_[i] = std::log1p(-x_[i]);
  }
}

double BetaKernelEstimator::evaluate(double z, double bandwidth) const {
  const double am1 = z / bandwidth;
  const double bm1 = (1.0 - z) / bandwidth;
  const double log_norm = std::lgamma(am1 + bm1 + 2.0) - std::lgamma(am1 + 1.0) -
                          std::lgamma(bm1 + 1.0);
  // The kernel peaks at x = z.
  const double peak = am1 * std::log(z) + bm1 * std::log1p(-z);
  const double cutoff = peak - kTruncation;
  auto term = [&](std::size_t i) { return am1 * log_x_[i] + bm1 * log_1mx_[i]; };

  const auto start = static_cast<std::size_t>(std::lower_bound(x_.begin(), x_.end(), z) - x_.begin());
  double sum = 0.0;
  for (std::size_t i = start; i < x_.size(); ++i) {
    const double t = term(i);
    if (t < cutoff) break;
    sum += std::exp(t + log_norm);
  }
  for (std::size_t i = start; i-- > 0;) {
    const double t = term(i);
    if (t < cutoff) break;
    sum += std::exp(t + log_norm);
  }
  return sum / static_cast<double>(x_.size());
}

DensityEstimate BetaKernelEstimator::density(double bandwidth, std::size_t n_bins) const {
  if (!(bandwidth >= kMinBandwidth && bandwidth <= kMaxBandwidth)) {
    throw InputError("bandwidth " + std::to_string(bandwidth) + " outside [0.001, 0.5]");
  }
  if (n_bins < 2) throw InputError("density needs at least 2 bins");
  DensityEstimate out{bin_centers(n_bins), std::vector<double>(n_bins), x_.size()};
  for (std::size_t i = 0; i < n_bins; ++i) out.values[i] = evaluate(out.bin_centers[i], bandwidth);
  return out;
}

DensityEstimate beta_kernel_density(std::span<const double> probs, double bandwidth,
                                    std::size_t n_bins) {
  return BetaKernelEstimator(probs).density(bandwidth, n_bins);
}

std::string_view to_string(BandwidthObjective objective) {
  return objective == BandwidthObjective::kMse ? "mse" : "js";
}

BandwidthObjective parse_bandwidth_objective(std::string_view text) {
  if (text == "mse") return BandwidthObjective::kMse;
  if (text == "js") return BandwidthObjective::kJensenShannon;
  throw InputError("unknown bandwidth objective '" + std::string(text) + "'");
}

double bandwidth_loss(const DensityEstimate& histogram, const DensityEstimate& kernel,
                      BandwidthObjective objective) {
  const auto n = histogram.values.size();
  if (kernel.values.size() != n || n == 0) throw InputError("densities have different bins");
  if (objective == BandwidthObjective::kMse) {
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = histogram.values[i] - kernel.values[i];
      ss += d * d;
    }
    return ss / static_cast<double>(n);
  }
  const double sp = std::accumulate(histogram.values.begin(), histogram.values.end(), 0.0);
  const double sq = std::accumulate(kernel.values.begin(), kernel.values.end(), 0.0);
  if (!(sp > 0.0) || !(sq > 0.0)) return std::sqrt(std::log(2.0));
  double js = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = histogram.values[i] / sp;
    const double q = kernel.values[i] / sq;
    const double m = 0.5 * (p + q);
    if (p > 0.0) js += 0.5 * p * std::log(p / m);
    if (q > 0.0) js += 0.5 * q * std::log(q / m);
  }
  return std::sqrt(std::max(0.0, js));
}

double bandwidth_objective(const BetaKernelEstimator& estimator, const DensityEstimate& histogram,
                           double bandwidth, BandwidthObjective objective) {
  return bandwidth_loss(histogram, estimator.density(bandwidth, histogram.n_bins()), objective);
}

Bandwidth estimate_bandwidth(std::span<const double> probs, std::size_t n_bins,
                             const BandwidthConfig& config) {
  if (probs.size() < 10) throw InputError("bandwidth estimation needs at least 10 samples");
  const auto histogram = histogram_density(probs, n_bins);
  Bandwidth out;
  const auto [mn, mx] = std::minmax_element(probs.begin(), probs.end());
  if (*mn == *mx) {
    out.degenerate = true;
    out.value = kMinBandwidth;
    out.loss = bandwidth_loss(histogram, beta_kernel_density(probs, kMinBandwidth, n_bins),
                              config.objective);
    return out;
  }
  const BetaKernelEstimator estimator(probs);
  const std::function<double(double)> objective = [&](double bw) {
    return bandwidth_objective(estimator, histogram, bw, config.objective);
  };
  out.search = differential_evolution(objective, kMinBandwidth, kMaxBandwidth, config.optimizer);
  out.value = std::clamp(out.search.argmin, kMinBandwidth, kMaxBandwidth);
  out.loss = out.search.value;
  if (out.search.degenerate) {
    out.degenerate = true;
    out.value = kMinBandwidth;
    out.loss = objective(kMinBandwidth);
  }
  return out;
}

void write_density_csv(const DensityEstimate& density, const std::filesystem::path& path,
                       const std::vector<std::string>& preamble) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  for (const auto& line : preamble) out << "# " << line << '\n';
  out << "bin_center,value\n";
  for (std::size_t i = 0; i < density.n_bins(); ++i) {
    out << csv::format_number(density.bin_centers[i]) << ','
        << csv::format_number(density.values[i]) << '\n';
  }
}

}  // namespace puprior
