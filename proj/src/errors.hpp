#pragma once

#include <stdexcept>
#include <string>

namespace pdqkd {

// An iterative evaluation (series, quadrature, linear solve) failed to
// reach its tolerance within the hard iteration/node ceiling.
struct NonConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A requested photon-number cutoff leaves more tail mass than the
// distribution invariant allows.
struct CutoffError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Observations violate a sign condition or precondition of the decoy
// estimation procedure; the bounds are not valid for these inputs.
struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-range scenario configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace pdqkd
