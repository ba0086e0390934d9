#pragma once

#include "puprior/dataset.hpp"
#include "puprior/rng.hpp"
#include "puprior/types.hpp"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace fixture {

/// Fresh per-test directory under the system temp dir, removed on exit.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("puprior_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& file) const {
    return path_ / file;
  }

 private:
  std::filesystem::path path_;
};

/// Small SCAR set for tests that only need the pipeline to run.
inline puprior::PUDataset small_scar(double alpha, std::uint64_t seed, std::size_t n_pos = 300,
                                     std::size_t n_unl = 900, std::size_t n_features = 8,
                                     double class_sep = 1.0) {
  puprior::SyntheticConfig c;
  c.n_positive = n_pos;
  c.n_unlabeled = n_unl;
  c.n_features = n_features;
  c.alpha_true = alpha;
  c.class_sep = class_sep;
  c.seed = seed;
  return puprior::generate_scar(c);
}

/// Desk-scale generator settings shared by the acceptance criteria.
inline puprior::SyntheticConfig desk_config(double alpha, std::uint64_t seed, bool snar) {
  puprior::SyntheticConfig c;
  c.alpha_true = alpha;
  c.seed = seed;
  if (snar) {
    c.n_subclasses = 5;
    c.subclass_mix = puprior::geometric_mix(5);
  }
  return c;
}

inline std::vector<double> uniform_samples(std::size_t n, std::uint64_t seed) {
  puprior::Rng rng(seed);
  std::vector<double> out(n);
  for (double& x : out) x = rng.uniform();
  return out;
}

/// Beta(a, b) sample via two gamma draws for integer shapes (sum of
/// exponentials), enough for the fixed shapes used in tests.
inline double beta_integer_shapes(puprior::Rng& rng, int a, int b) {
  auto gamma_int = [&](int k) {
    double s = 0;
    for (int i = 0; i < k; ++i) s -= std::log(1.0 - rng.uniform());
    return s;
  };
  const double x = gamma_int(a);
  const double y = gamma_int(b);
  return x / (x + y);
}

}  // namespace fixture
