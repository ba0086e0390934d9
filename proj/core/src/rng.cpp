#include "puprior/rng.hpp"

#include "puprior/types.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace puprior {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stage) {
  std::uint64_t state = master ^ (stage * 0xd1b54a32d192ed03ULL);
  splitmix64(state);
  return splitmix64(state);
}

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::below(std::size_t n) {
  if (n == 0) throw InputError("Rng::below requires a positive bound");
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return static_cast<std::size_t>(draw % bound);
}

std::vector<std::size_t> Rng::sample(std::size_t n, std::size_t k) {
  if (k > n) throw InputError("cannot sample more items than available");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + below(n - i)]);
  }
  pool.resize(k);
  return pool;
}

std::string_view to_string(LabelMode mode) {
  return mode == LabelMode::kScar ? "scar" : "snar";
}

LabelMode parse_label_mode(std::string_view text) {
  if (text == "scar") return LabelMode::kScar;
  if (text == "snar") return LabelMode::kSnar;
  throw InputError("unknown mode '" + std::string(text) + "' (expected scar|snar)");
}

}  // namespace puprior
