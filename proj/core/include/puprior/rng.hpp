#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace puprior {

/// One step of the splitmix64 sequence; advances `state`.
std::uint64_t splitmix64(std::uint64_t& state);

/// Derives an independent stream seed from a master seed and a stage tag.
/// Stage tags used by the pipelines live in `seed_stage`.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage);

namespace seed_stage {
inline constexpr std::uint64_t kClassifier = 1;
inline constexpr std::uint64_t kClustering = 2;
inline constexpr std::uint64_t kCalibration = 3;
inline constexpr std::uint64_t kRetrain = 4;
// Per-cluster stages are offset by the cluster index.
inline constexpr std::uint64_t kClusterFolds = 100;
inline constexpr std::uint64_t kClusterOptimizer = 200;
inline constexpr std::uint64_t kClusterCalibration = 300;
}  // namespace seed_stage

/// Portable random source. The standard distributions are implementation
/// defined, so sampling is done by hand on top of mt19937_64 to keep datasets
/// bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one value per call).
  double normal();

  /// Uniform integer in [0, n). Requires n > 0.
  std::size_t below(std::size_t n);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

  /// `k` distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace puprior
