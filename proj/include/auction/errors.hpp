#pragma once

#include <stdexcept>

namespace auction {

// Bad configs, malformed files, schema violations. CLI exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure: non-convergence, singular input, underflow. CLI exit code 3.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// The data cannot pin down the model (n=2 cells, single cell, ...). CLI exit code 4.
struct UnidentifiedError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace auction
