#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace w1 {

// Global comparison tolerance for mass/distance arithmetic.  Desk-scale
// transportation problems stay far from conditioning limits; every solve
// additionally carries a dual certificate bounding the true error.
inline constexpr double kEps = 1e-9;

// Probability vectors must sum to one at least this tightly.
inline constexpr double kMassEps = 1e-12;

// Multi-marginal plan atoms below this weight are pruned (the pruned total
// is tracked and reported alongside all affected tolerances).
inline constexpr double kAtomPrune = 1e-15;

// Malformed or inconsistent inputs (bad measures, mismatched marginals,
// out-of-range parameters).  CLI maps this to exit code 2.
struct input_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Operation not available for this object (e.g. refinement without a
// generator, line oracle on a non-embedded space).
struct unsupported_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool nearly_equal(double a, double b, double tol = kEps) {
  return std::abs(a - b) <= tol;
}

}  // namespace w1
