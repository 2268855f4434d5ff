#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "w1/common.hpp"
#include "w1/space.hpp"

namespace w1 {

// Probability weight vector over the points of a MetricSpace.
struct DiscreteMeasure {
  std::vector<double> weights;

  std::size_t size() const { return weights.size(); }
  double operator()(std::size_t i) const { return weights[i]; }
  double total() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }
};

inline void check_measure(const MetricSpace& space, const DiscreteMeasure& mu, const char* what) {
  if (mu.weights.size() != space.size())
    throw input_error(std::string(what) + ": measure length differs from space size");
  for (double w : mu.weights)
    if (w < 0.0) throw input_error(std::string(what) + ": negative weight");
  if (std::abs(mu.total() - 1.0) > kMassEps)
    throw input_error(std::string(what) + ": weights do not sum to 1");
}

inline DiscreteMeasure make_measure(const MetricSpace& space, std::vector<double> weights) {
  DiscreteMeasure mu{std::move(weights)};
  check_measure(space, mu, "make_measure");
  return mu;
}

inline DiscreteMeasure dirac(const MetricSpace& space, std::size_t at) {
  if (at >= space.size()) throw input_error("dirac: index out of range");
  DiscreteMeasure mu;
  mu.weights.assign(space.size(), 0.0);
  mu.weights[at] = 1.0;
  return mu;
}

inline DiscreteMeasure uniform_on(const MetricSpace& space, const std::vector<std::size_t>& pts) {
  if (pts.empty()) throw input_error("uniform_on: empty support");
  DiscreteMeasure mu;
  mu.weights.assign(space.size(), 0.0);
  for (std::size_t p : pts) {
    if (p >= space.size()) throw input_error("uniform_on: index out of range");
    mu.weights[p] += 1.0 / static_cast<double>(pts.size());
  }
  return mu;
}

// First moment about a base point: sum_x d(base, x) mu(x).  Finite spaces
// make this finite always, which is what P1 membership reduces to here.
inline double first_moment(const MetricSpace& space, const DiscreteMeasure& mu, std::size_t base) {
  if (base >= space.size()) throw input_error("first_moment: base index out of range");
  check_measure(space, mu, "first_moment");
  double s = 0.0;
  for (std::size_t x = 0; x < space.size(); ++x) s += space.d(base, x) * mu(x);
  return s;
}

}  // namespace w1
