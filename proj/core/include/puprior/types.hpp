#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace puprior {

/// Row-major would suit the tree learner better, but every consumer that does
/// linear algebra (clustering, scaling) wants Eigen's default layout.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

using Probabilities = std::vector<double>;
using Labels = std::vector<int>;

/// Bad or inconsistent input: malformed files, violated preconditions.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not produce a meaningful result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class LabelMode { kScar, kSnar };

std::string_view to_string(LabelMode mode);
LabelMode parse_label_mode(std::string_view text);

}  // namespace puprior
