#pragma once

#include <memory>
#include <random>
#include <vector>

#include "w1/measure.hpp"
#include "w1/space.hpp"
#include "w1/step_curve.hpp"
#include "w1/transport.hpp"

// Shared deterministic generators for the property tests.  Everything is
// seeded explicitly so failures reproduce.
namespace testgen {

inline std::vector<double> random_line_coords(std::mt19937& rng, std::size_t n) {
  std::uniform_real_distribution<double> step(0.1, 2.0);
  std::vector<double> xs;
  double x = -5.0;
  for (std::size_t i = 0; i < n; ++i) {
    x += step(rng);
    xs.push_back(x);
  }
  return xs;
}

// Rational weights: integer masses over a common denominator.
inline w1::DiscreteMeasure random_rational_measure(std::mt19937& rng, std::size_t n) {
  std::uniform_int_distribution<int> mass(0, 20);
  std::vector<int> k(n);
  int total = 0;
  for (auto& v : k) {
    v = mass(rng);
    total += v;
  }
  if (total == 0) {
    k[0] = 1;
    total = 1;
  }
  w1::DiscreteMeasure mu;
  for (int v : k) mu.weights.push_back(static_cast<double>(v) / total);
  return mu;
}

inline std::shared_ptr<const w1::MetricSpace> random_line_space(std::mt19937& rng, std::size_t n) {
  return std::make_shared<const w1::MetricSpace>(w1::line_space(random_line_coords(rng, n)));
}

// Random metric space via random points in the plane (metric axioms hold by
// construction, and validate_metric double-checks).
inline std::shared_ptr<const w1::MetricSpace> random_plane_space(std::mt19937& rng,
                                                                 std::size_t n) {
  std::uniform_real_distribution<double> coord(-3.0, 3.0);
  std::vector<std::vector<double>> pts;
  while (pts.size() < n) {
    std::vector<double> p{coord(rng), coord(rng)};
    bool dup = false;
    for (const auto& q : pts)
      if (w1::euclidean(p, q) < 1e-6) dup = true;
    if (!dup) pts.push_back(p);
  }
  return std::make_shared<const w1::MetricSpace>(w1::make_space({}, pts, std::nullopt));
}

// Random step curve: distinct jump times on the 2^-12 grid (gaps stay above
// the finest dyadic h the equivalence checks use), no jump at t = 1.
inline w1::StepCurve random_step_curve(std::mt19937& rng, std::size_t space_size,
                                       std::size_t max_jumps) {
  std::uniform_int_distribution<std::size_t> njumps(0, max_jumps);
  std::uniform_int_distribution<int> slot(1, (1 << 12) - 2);
  std::uniform_int_distribution<std::size_t> point(0, space_size - 1);
  const std::size_t J = njumps(rng);
  std::vector<int> slots;
  while (slots.size() < J) {
    int s = slot(rng);
    bool dup = false;
    for (int t : slots)
      if (t == s) dup = true;
    if (!dup) slots.push_back(s);
  }
  std::sort(slots.begin(), slots.end());
  std::vector<double> times;
  for (int s : slots) times.push_back(std::ldexp(static_cast<double>(s), -12));
  std::vector<std::size_t> values{point(rng)};
  for (std::size_t k = 0; k < J; ++k) {
    std::size_t v = point(rng);
    while (v == values.back()) v = point(rng);
    values.push_back(v);
  }
  return w1::make_step_curve(space_size, times, values);
}

// Feasible coupling with exact marginals: greedy fill over randomly permuted
// rows and columns.
inline w1::Coupling random_feasible_coupling(std::mt19937& rng, const w1::MetricSpace& space,
                                             const w1::DiscreteMeasure& mu,
                                             const w1::DiscreteMeasure& nu) {
  std::vector<std::size_t> rows, cols;
  for (std::size_t x = 0; x < space.size(); ++x)
    if (mu(x) > 0.0) rows.push_back(x);
  for (std::size_t y = 0; y < space.size(); ++y)
    if (nu(y) > 0.0) cols.push_back(y);
  std::shuffle(rows.begin(), rows.end(), rng);
  std::shuffle(cols.begin(), cols.end(), rng);
  w1::Coupling c;
  c.n = space.size();
  std::size_t r = 0, k = 0;
  double mrow = mu(rows[0]), mcol = nu(cols[0]);
  while (r < rows.size() && k < cols.size()) {
    const double m = std::min(mrow, mcol);
    if (m > 0.0) c.entries.push_back({rows[r], cols[k], m});
    mrow -= m;
    mcol -= m;
    if (mrow <= 0.0 && ++r < rows.size()) mrow = mu(rows[r]);
    if (mcol <= 0.0 && ++k < cols.size()) mcol = nu(cols[k]);
  }
  c.sort_entries();
  return c;
}

}  // namespace testgen
