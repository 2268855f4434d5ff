#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "w1/common.hpp"
#include "w1/measure_curve.hpp"

namespace w1 {

// Finite-resolution split of the curve's variation into jump, absolutely
// continuous and residual (Cantor proxy) parts.  The exact decomposition is
// a limit object; this reports the level-L estimates plus a convergence
// diagnostic, never a claim of exactness.
struct VariationProfile {
  struct AtomEstimate {
    double time_lo, time_hi;  // finest cell bracketing the jump
    double time;              // cell midpoint
    double mass;              // refinement-stable increment
  };
  int levels = 0;
  std::vector<double> cell_grid;        // finest dyadic grid
  std::vector<double> interval_masses;  // W1 increment per finest cell
  std::vector<AtomEstimate> atom_estimates;
  std::vector<double> ac_density;  // per finest cell; 0 where not AC-stable
  double total_variation = 0.0;
  double atom_mass = 0.0;
  double ac_mass = 0.0;
  double residual_estimate = 0.0;
  double refinement_delta = 0.0;  // |Var_L - Var_{L-1}|, the reported tolerance
};

// Jump detection rule: a cell is an atom when halving it five consecutive
// times changes its W1 increment by < 1e-6 relative (jump increments are
// refinement-stable, AC increments halve).  Cells whose increment/dt agrees
// with the parent's density are AC; the rest is residual.
inline VariationProfile decompose_variation(const MeasureCurve& mc, int levels,
                                            double atom_rel_tol = 1e-6,
                                            double ac_rel_tol = 1e-3) {
  if (!mc.has_generator())
    throw unsupported_error("decompose_variation: refinement requires a generator");
  if (levels < 6) throw input_error("decompose_variation: need at least 6 levels");

  // increments[l][i] = W1 increment of dyadic cell i at level l
  std::vector<std::vector<double>> inc(levels + 1);
  for (int l = 1; l <= levels; ++l) inc[l] = curve_increments(mc.refined(dyadic_grid(l)));

  VariationProfile out;
  out.levels = levels;
  out.cell_grid = dyadic_grid(levels);
  out.interval_masses = inc[levels];
  for (double v : inc[levels]) out.total_variation += v;
  double var_prev = 0.0;
  for (double v : inc[levels - 1]) var_prev += v;
  out.refinement_delta = std::abs(out.total_variation - var_prev);

  const int start = levels - 5;
  const std::size_t fine_cells = inc[levels].size();
  std::vector<char> under_atom(fine_cells, 0);
  for (std::size_t c = 0; c < inc[start].size(); ++c) {
    if (inc[start][c] <= 1e-9) continue;
    // follow the dominant child through five halvings
    std::size_t cell = c;
    double value = inc[start][c];
    bool stable = true;
    for (int l = start; l < levels && stable; ++l) {
      const double left = inc[l + 1][2 * cell], right = inc[l + 1][2 * cell + 1];
      const std::size_t child = right > left ? 2 * cell + 1 : 2 * cell;
      const double cv = inc[l + 1][child];
      if (std::abs(cv - value) > atom_rel_tol * std::max(value, 1e-12)) stable = false;
      cell = child;
      value = cv;
    }
    if (stable) {
      VariationProfile::AtomEstimate a;
      a.time_lo = out.cell_grid[cell];
      a.time_hi = out.cell_grid[cell + 1];
      a.time = a.time_lo + (a.time_hi - a.time_lo) / 2.0;
      a.mass = value;
      out.atom_estimates.push_back(a);
      out.atom_mass += value;
      under_atom[cell] = 1;
    }
  }

  // AC cells must hold their density through the same five halvings the
  // atom rule uses; a single parent/child match can be fooled by the
  // self-similar spacing of a Cantor-type increment pattern.
  out.ac_density.assign(fine_cells, 0.0);
  const double dt = 1.0 / static_cast<double>(fine_cells);
  for (std::size_t i = 0; i < fine_cells; ++i) {
    if (under_atom[i]) continue;
    const double dens = inc[levels][i] / dt;
    bool stable = true;
    for (int l = start; l < levels && stable; ++l) {
      const double d0 = inc[l][i >> (levels - l)] * std::ldexp(1.0, l);
      const double d1 = inc[l + 1][i >> (levels - l - 1)] * std::ldexp(1.0, l + 1);
      if (std::abs(d1 - d0) > std::max(1e-9, ac_rel_tol * std::max(d0, d1))) stable = false;
    }
    if (stable) {
      out.ac_density[i] = dens;
      out.ac_mass += inc[levels][i];
    }
  }
  out.residual_estimate = out.total_variation - out.atom_mass - out.ac_mass;
  return out;
}

}  // namespace w1
