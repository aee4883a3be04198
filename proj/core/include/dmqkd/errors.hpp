#pragma once

#include <stdexcept>

namespace dmqkd {

// Invalid or inconsistent user-facing configuration (CLI exit code 2).
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Numerical failure: tolerance not met, non-convergence, unphysical
// intermediate result (CLI exit code 3).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fock cutoff too small for the requested coherent amplitudes.
struct cutoff_error : numeric_error {
  using numeric_error::numeric_error;
};

}  // namespace dmqkd
