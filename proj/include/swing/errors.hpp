#pragma once

#include <stdexcept>

namespace swing {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Simulation or solver failure (non-finite state, singular system, ...).
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace swing
