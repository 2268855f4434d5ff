#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "w1/common.hpp"
#include "w1/measure.hpp"
#include "w1/space.hpp"

namespace w1 {

// Closed-form W1 on the real line: the integral of |F_mu - F_nu|.  This is
// the independent ground truth the flow solver is tested against; it shares
// no code path with solve_w1().
inline double w1_line_oracle(const MetricSpace& space, const DiscreteMeasure& mu,
                             const DiscreteMeasure& nu) {
  if (!space.line_embedded())
    throw unsupported_error("w1_line_oracle: space has no 1-d embedding");
  check_measure(space, mu, "w1_line_oracle(mu)");
  check_measure(space, nu, "w1_line_oracle(nu)");

  const std::size_t n = space.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return space.coord1d(a) < space.coord1d(b); });

  double total = 0.0, fdiff = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    fdiff += mu(order[k]) - nu(order[k]);
    total += std::abs(fdiff) * (space.coord1d(order[k + 1]) - space.coord1d(order[k]));
  }
  return total;
}

}  // namespace w1
