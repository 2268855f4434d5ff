#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "w1/common.hpp"
#include "w1/measure.hpp"
#include "w1/space.hpp"
#include "w1/transport.hpp"

namespace w1 {

// Serializable description of the exact rule backing a generated curve.
struct GeneratorSpec {
  std::string name;
  std::map<std::string, double> scalars;
  std::vector<std::vector<double>> payload;  // endpoint measures, sigma0 weights, waypoints
};

// Curve of discrete measures sampled on a time grid, optionally backed by an
// exact generator that can evaluate the curve at any time in [0, 1].
struct MeasureCurve {
  std::shared_ptr<const MetricSpace> space_ptr;
  std::vector<double> grid;
  std::vector<DiscreteMeasure> measures;
  std::function<DiscreteMeasure(double)> sampler;
  std::optional<GeneratorSpec> generator;

  const MetricSpace& space() const { return *space_ptr; }
  std::size_t steps() const { return grid.size() - 1; }
  bool has_generator() const { return static_cast<bool>(sampler); }

  const DiscreteMeasure& front() const { return measures.front(); }
  const DiscreteMeasure& back() const { return measures.back(); }

  // Grid samples are returned as stored so that refining and restricting
  // back is bit-exact; off-grid times require the generator.
  DiscreteMeasure sample(double t) const {
    auto it = std::lower_bound(grid.begin(), grid.end(), t);
    if (it != grid.end() && *it == t) return measures[it - grid.begin()];
    if (!sampler) throw unsupported_error("MeasureCurve: off-grid sample without generator");
    return sampler(t);
  }

  MeasureCurve refined(const std::vector<double>& new_grid) const {
    if (!sampler) throw unsupported_error("MeasureCurve: refinement requires a generator");
    MeasureCurve out = *this;
    out.grid = new_grid;
    out.measures.clear();
    for (double t : new_grid) out.measures.push_back(sample(t));
    return out;
  }
};

inline void check_grid(const std::vector<double>& grid) {
  if (grid.size() < 2 || grid.front() != 0.0 || grid.back() != 1.0)
    throw input_error("MeasureCurve: grid must run from 0 to 1");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw input_error("MeasureCurve: grid must be increasing");
}

inline MeasureCurve make_measure_curve(std::shared_ptr<const MetricSpace> space,
                                       std::vector<double> grid,
                                       std::vector<DiscreteMeasure> measures) {
  check_grid(grid);
  if (measures.size() != grid.size())
    throw input_error("MeasureCurve: one measure per grid time required");
  for (const auto& m : measures) check_measure(*space, m, "MeasureCurve");
  MeasureCurve mc;
  mc.space_ptr = std::move(space);
  mc.grid = std::move(grid);
  mc.measures = std::move(measures);
  return mc;
}

inline MeasureCurve make_generated_curve(std::shared_ptr<const MetricSpace> space,
                                         std::vector<double> grid,
                                         std::function<DiscreteMeasure(double)> sampler,
                                         GeneratorSpec spec) {
  check_grid(grid);
  MeasureCurve mc;
  mc.space_ptr = std::move(space);
  mc.grid = std::move(grid);
  for (double t : mc.grid) mc.measures.push_back(sampler(t));
  for (const auto& m : mc.measures) check_measure(*mc.space_ptr, m, "MeasureCurve");
  mc.sampler = std::move(sampler);
  mc.generator = std::move(spec);
  return mc;
}

inline std::vector<double> dyadic_grid(int level) {
  if (level < 0 || level > 24) throw input_error("dyadic_grid: level outside [0, 24]");
  const std::size_t cells = std::size_t{1} << level;
  std::vector<double> g(cells + 1);
  for (std::size_t i = 0; i <= cells; ++i)
    g[i] = static_cast<double>(i) / static_cast<double>(cells);
  return g;
}

// Per-cell W1 increments along the grid.
inline std::vector<double> curve_increments(const MeasureCurve& mc) {
  std::vector<double> inc;
  inc.reserve(mc.steps());
  for (std::size_t i = 0; i + 1 < mc.grid.size(); ++i)
    inc.push_back(solve_w1(mc.space(), mc.measures[i], mc.measures[i + 1]).distance);
  return inc;
}

// Total W1-variation along the grid; non-decreasing under grid refinement.
inline double curve_variation(const MeasureCurve& mc) {
  double s = 0.0;
  for (double v : curve_increments(mc)) s += v;
  return s;
}

// W1(mu_t, mu_{t+h}) / |h|; h may be negative.
inline double metric_derivative(const MeasureCurve& mc, double t, double h) {
  if (h == 0.0) throw input_error("metric_derivative: h must be nonzero");
  const double s = t + h;
  if (t < 0.0 || t > 1.0 || s < 0.0 || s > 1.0)
    throw input_error("metric_derivative: times outside [0, 1]");
  return solve_w1(mc.space(), mc.sample(t), mc.sample(s)).distance / std::abs(h);
}

// A curve is a BV-geodesic when its variation equals the endpoint distance.
inline bool is_bv_geodesic(const MeasureCurve& mc, double tol = 1e-6) {
  const double var = curve_variation(mc);
  const double ends = solve_w1(mc.space(), mc.front(), mc.back()).distance;
  return std::abs(var - ends) <= tol;
}

// Constant speed at grid resolution: every increment equals dt * W1(mu_0, mu_1).
inline bool is_constant_speed(const MeasureCurve& mc, double tol = 1e-6) {
  const double dt = mc.grid[1] - mc.grid[0];
  for (std::size_t i = 1; i + 1 < mc.grid.size(); ++i)
    if (std::abs((mc.grid[i + 1] - mc.grid[i]) - dt) > 1e-12)
      throw unsupported_error("is_constant_speed: requires a uniform grid");
  const double ends = solve_w1(mc.space(), mc.front(), mc.back()).distance;
  for (double v : curve_increments(mc))
    if (std::abs(v - dt * ends) > tol) return false;
  return is_bv_geodesic(mc, tol);
}

}  // namespace w1
