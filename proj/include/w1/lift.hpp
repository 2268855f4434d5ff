#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <utility>
#include <vector>

#include "w1/common.hpp"
#include "w1/decompose.hpp"
#include "w1/gluing.hpp"
#include "w1/measure_curve.hpp"
#include "w1/space.hpp"
#include "w1/step_curve.hpp"
#include "w1/transport.hpp"

namespace w1 {

struct LiftAtom {
  StepCurve curve;
  double weight;
};

// Finite weighted collection of step curves: a probability measure on
// cadlag paths.  `grid` records the time resolution the lift was built at
// (jumps only occur at these times), which interval queries rely on.
struct Lift {
  std::shared_ptr<const MetricSpace> space_ptr;
  std::vector<LiftAtom> atoms;
  std::vector<double> grid;
  double pruned_mass = 0.0;

  const MetricSpace& space() const { return *space_ptr; }
  double total_weight() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.weight;
    return s;
  }
};

namespace detail {

// The deterministic element of Opt(mu, nu) used wherever a single chain
// coupling is needed: monotone on line-embedded spaces, the flow solver's
// coupling otherwise.
inline Coupling canonical_optimal_coupling(const MetricSpace& space, const DiscreteMeasure& mu,
                                           const DiscreteMeasure& nu) {
  if (space.line_embedded()) return monotone_coupling(space, mu, nu);
  return solve_w1(space, mu, nu).coupling;
}

// Exact support size of the glued chain, computed without materializing the
// plan: path counts per endpoint evolve linearly along the chain.  Returns
// early once the count passes `cap`.
inline double glued_support_size(const std::vector<Coupling>& chain, double cap) {
  std::vector<double> cnt(chain[0].n, 0.0);
  for (const auto& e : chain[0].entries) cnt[e.j] += 1.0;
  for (std::size_t i = 1; i < chain.size(); ++i) {
    std::vector<double> next(chain[i].n, 0.0);
    double total = 0.0;
    for (const auto& e : chain[i].entries) {
      next[e.j] += cnt[e.i];
      total += cnt[e.i];
    }
    if (total > cap) return total;
    cnt.swap(next);
  }
  double total = 0.0;
  for (double c : cnt) total += c;
  return total;
}

// Multi-marginal plan for line-embedded spaces: the quantile process
// (F_0^{-1}(U), ..., F_k^{-1}(U)).  Its pairwise projections are the
// monotone couplings, hence optimal, and its support is bounded by the
// total number of quantile breakpoints.  Iterated conditional-independence
// gluing would satisfy the same marginal constraints but its support can
// grow exponentially along heavily branching chains.
inline MultiCoupling quantile_plan(const MeasureCurve& rc) {
  const auto& sp = rc.space();
  const std::size_t n = sp.size(), T = rc.grid.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return sp.coord1d(a) < sp.coord1d(b); });

  std::vector<std::vector<double>> cum(T, std::vector<double>(n));
  std::vector<double> bp{0.0};
  for (std::size_t t = 0; t < T; ++t) {
    double c = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      c += rc.measures[t](order[k]);
      cum[t][k] = c;
      if (c > 0.0 && c < 1.0) bp.push_back(c);
    }
    bp.push_back(c);  // the per-time total, 1 up to float dust
  }
  std::sort(bp.begin(), bp.end());
  bp.erase(std::unique(bp.begin(), bp.end()), bp.end());

  MultiCoupling plan;
  plan.n = n;
  plan.marginals = T;
  for (std::size_t cell = 0; cell + 1 < bp.size(); ++cell) {
    const double width = bp[cell + 1] - bp[cell];
    if (width <= 0.0) continue;
    if (width < kAtomPrune) {
      plan.pruned_mass += width;
      continue;
    }
    const double q = bp[cell] + width / 2.0;
    PathAtom atom;
    atom.mass = width;
    atom.path.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
      const auto it = std::upper_bound(cum[t].begin(), cum[t].end(), q);
      const std::size_t k = std::min<std::size_t>(it - cum[t].begin(), n - 1);
      atom.path[t] = order[k];
    }
    plan.atoms.push_back(std::move(atom));
  }
  return plan;
}

// Merges duplicate curves, prunes dust, renormalizes to total weight 1 and
// fixes a deterministic atom order.
inline void finalize_lift(Lift& lift) {
  std::map<StepCurve, double> merged;
  for (auto& a : lift.atoms) merged[a.curve] += a.weight;
  lift.atoms.clear();
  double total = 0.0;
  for (auto& [curve, wgt] : merged) {
    if (wgt < kAtomPrune) {
      lift.pruned_mass += wgt;
      continue;
    }
    lift.atoms.push_back({curve, wgt});
    total += wgt;
  }
  for (auto& a : lift.atoms) a.weight /= total;
}

}  // namespace detail

inline Lift make_lift(std::shared_ptr<const MetricSpace> space, std::vector<LiftAtom> atoms,
                      std::vector<double> grid = {}) {
  Lift lift;
  lift.space_ptr = std::move(space);
  lift.atoms = std::move(atoms);
  lift.grid = std::move(grid);
  for (const auto& a : lift.atoms) {
    if (a.weight < 0.0) throw input_error("make_lift: negative weight");
    for (std::size_t v : a.curve.values)
      if (v >= lift.space().size()) throw input_error("make_lift: curve value out of range");
  }
  if (std::abs(lift.total_weight() - 1.0) > kEps)
    throw input_error("make_lift: weights must sum to 1");
  detail::finalize_lift(lift);
  return lift;
}

// The dyadic construction: optimal couplings on each cell, glued into a
// multi-marginal plan, pushed through the filling map (value x_i on
// [t^i, t^{i+1}), final value x_{2^N} at t = 1).
inline Lift build_lift(const MeasureCurve& mc, int level) {
  const auto grid = dyadic_grid(level);
  MeasureCurve rc;
  if (mc.grid == grid) {
    rc = mc;
  } else if (mc.has_generator()) {
    rc = mc.refined(grid);
  } else {
    throw input_error("build_lift: curve grid does not match the dyadic level and no generator");
  }

  // Primary route: glue the solver's optimal couplings (these keep common
  // mass in place).  Chains where many cells branch blow the glued support
  // up exponentially; the support size is pre-counted and, on line-embedded
  // spaces, such chains take the quantile plan instead, which carries the
  // same marginals with optimal pairwise projections.
  std::vector<Coupling> chain;
  chain.reserve(rc.steps());
  for (std::size_t i = 0; i + 1 < rc.grid.size(); ++i)
    chain.push_back(solve_w1(rc.space(), rc.measures[i], rc.measures[i + 1]).coupling);
  const double cap =
      std::min(300000.0, 8.0e6 / static_cast<double>(grid.size()));
  MultiCoupling plan;
  if (rc.space().line_embedded() && detail::glued_support_size(chain, cap) > cap)
    plan = detail::quantile_plan(rc);
  else
    plan = glue_chain(chain);

  Lift lift;
  lift.space_ptr = rc.space_ptr;
  lift.grid = grid;
  lift.pruned_mass = plan.pruned_mass;
  lift.atoms.reserve(plan.atoms.size());
  for (const auto& atom : plan.atoms) {
    std::vector<double> times(grid.begin() + 1, grid.end());
    StepCurve c = make_step_curve(rc.space().size(), std::move(times), atom.path);
    lift.atoms.push_back({std::move(c), atom.mass});
  }
  detail::finalize_lift(lift);
  return lift;
}

// Same construction with the coupling on one cell replaced by a
// deterministically shuffled feasible coupling (lowest row index against
// highest column index, greedy fill).  Marginals are unchanged, so the
// result is a marginal-correct but generally non-optimal lift.
inline Coupling shuffled_coupling(const MetricSpace& space, const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu) {
  std::vector<std::size_t> rows, cols;
  for (std::size_t x = 0; x < space.size(); ++x)
    if (mu(x) > 0.0) rows.push_back(x);
  for (std::size_t y = 0; y < space.size(); ++y)
    if (nu(y) > 0.0) cols.push_back(y);
  std::reverse(cols.begin(), cols.end());
  Coupling c;
  c.n = space.size();
  std::size_t r = 0, k = 0;
  double mrow = rows.empty() ? 0.0 : mu(rows[0]);
  double mcol = cols.empty() ? 0.0 : nu(cols[0]);
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

inline Lift build_adversarial_lift(const MeasureCurve& mc, int level, std::size_t shuffled_cell) {
  const auto grid = dyadic_grid(level);
  MeasureCurve rc = mc.grid == grid ? mc : mc.refined(grid);
  if (shuffled_cell >= rc.steps()) throw input_error("build_adversarial_lift: cell out of range");
  std::vector<Coupling> chain;
  for (std::size_t i = 0; i + 1 < rc.grid.size(); ++i) {
    if (i == shuffled_cell)
      chain.push_back(shuffled_coupling(rc.space(), rc.measures[i], rc.measures[i + 1]));
    else
      chain.push_back(detail::canonical_optimal_coupling(rc.space(), rc.measures[i],
                                                         rc.measures[i + 1]));
  }
  MultiCoupling plan = glue_chain(chain);
  Lift lift;
  lift.space_ptr = rc.space_ptr;
  lift.grid = grid;
  lift.pruned_mass = plan.pruned_mass;
  for (const auto& atom : plan.atoms) {
    std::vector<double> times(grid.begin() + 1, grid.end());
    lift.atoms.push_back({make_step_curve(rc.space().size(), std::move(times), atom.path),
                          atom.mass});
  }
  detail::finalize_lift(lift);
  return lift;
}

// Lift concentrated on map-interpolation curves: each mass point x waits at
// x and jumps to target[x] at a time alpha drawn uniformly from the dyadic
// grid.  This is the explicit family of the nonuniqueness example.
inline Lift map_interpolation_lift(std::shared_ptr<const MetricSpace> space,
                                   const DiscreteMeasure& mu0,
                                   const std::vector<std::size_t>& target, int level) {
  check_measure(*space, mu0, "map_interpolation_lift");
  if (target.size() != space->size())
    throw input_error("map_interpolation_lift: target map has wrong length");
  const auto grid = dyadic_grid(level);
  const std::size_t cells = grid.size() - 1;
  std::vector<LiftAtom> atoms;
  for (std::size_t x = 0; x < space->size(); ++x) {
    if (mu0(x) <= 0.0) continue;
    if (target[x] >= space->size()) throw input_error("map_interpolation_lift: bad target");
    for (std::size_t i = 1; i <= cells; ++i) {
      StepCurve c = make_step_curve(space->size(), {grid[i]}, {x, target[x]});
      atoms.push_back({std::move(c), mu0(x) / static_cast<double>(cells)});
    }
  }
  return make_lift(std::move(space), std::move(atoms), grid);
}

// Max total-variation discrepancy between the lift's time marginals and the
// curve's measures over the curve's grid.
inline double check_marginals(const Lift& lift, const MeasureCurve& mc) {
  if (lift.space_ptr->size() != mc.space().size())
    throw input_error("check_marginals: space mismatch");
  double worst = 0.0;
  for (std::size_t k = 0; k < mc.grid.size(); ++k) {
    std::vector<double> push(mc.space().size(), 0.0);
    for (const auto& a : lift.atoms) push[a.curve.eval(mc.grid[k])] += a.weight;
    for (std::size_t x = 0; x < push.size(); ++x)
      worst = std::max(worst, std::abs(push[x] - mc.measures[k](x)));
  }
  return worst;
}

struct LiftVariation {
  double total = 0.0;
  std::vector<double> per_atom;  // variation of each atom curve (unweighted)
};

// Mean pointwise variation of the lift, whole closed interval.
inline LiftVariation lift_variation(const Lift& lift) {
  LiftVariation lv;
  for (const auto& a : lift.atoms) {
    const double v = total_variation(lift.space(), a.curve);
    lv.per_atom.push_back(v);
    lv.total += a.weight * v;
  }
  return lv;
}

// Mean variation-measure mass of the lift on an interval.
inline double lift_interval_mass(const Lift& lift, double a, double b, IntervalKind kind) {
  double s = 0.0;
  for (const auto& atom : lift.atoms)
    s += atom.weight * variation_measure(lift.space(), atom.curve).interval_mass(a, b, kind);
  return s;
}

struct SuperpositionReport {
  struct Row {
    double a, b;
    double curve_mass;  // W1-variation of the curve over (a, b]
    double lift_mass;   // mean |D gamma|((a, b]) over the lift
    bool bound_ok;
  };
  std::vector<Row> rows;
  bool all_bounds_ok = true;
  double full_curve = 0.0, full_lift = 0.0;
  bool full_equality = false;  // the exact identity satisfied by built lifts
};

// Verifies |D mu|((a,b]) <= mean lift variation on every queried interval
// (interval ends must be grid times of the curve), plus the full-interval
// equality that the dyadic construction satisfies exactly.
inline SuperpositionReport check_superposition_bound(
    const Lift& lift, const MeasureCurve& mc, const std::vector<std::pair<double, double>>& intervals,
    double tol = 1e-8) {
  if (check_marginals(lift, mc) > kEps)
    throw input_error("check_superposition_bound: lift marginals do not match the curve");
  const auto inc = curve_increments(mc);
  auto curve_mass = [&](double a, double b) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < mc.grid.size(); ++i)
      if (mc.grid[i] >= a - 1e-15 && mc.grid[i + 1] <= b + 1e-15) s += inc[i];
    return s;
  };
  auto on_grid = [&](double t) {
    return std::binary_search(mc.grid.begin(), mc.grid.end(), t);
  };
  SuperpositionReport rep;
  for (auto [a, b] : intervals) {
    if (!(a < b) || !on_grid(a) || !on_grid(b))
      throw input_error("check_superposition_bound: interval ends must be curve grid times");
    SuperpositionReport::Row row;
    row.a = a;
    row.b = b;
    row.curve_mass = curve_mass(a, b);
    row.lift_mass = lift_interval_mass(lift, a, b, IntervalKind::left_open);
    row.bound_ok = row.curve_mass <= row.lift_mass + tol;
    rep.all_bounds_ok = rep.all_bounds_ok && row.bound_ok;
    rep.rows.push_back(row);
  }
  rep.full_curve = curve_mass(0.0, 1.0);
  rep.full_lift = lift_interval_mass(lift, 0.0, 1.0, IntervalKind::left_open);
  rep.full_equality = std::abs(rep.full_curve - rep.full_lift) <= tol;
  return rep;
}

// Jump balance at a time t: the curve's estimated jump mass against the mean
// jump mass of the lift atoms, both read at the lift's own time resolution.
struct JumpBalance {
  double lhs = 0.0;  // curve jump estimate at t (refinement-stable increment)
  double rhs = 0.0;  // mean atom jump mass in the lift cell containing t
  double window_lo = 0.0, window_hi = 1.0;
};

inline JumpBalance jump_balance(const Lift& lift, const MeasureCurve& mc, double t,
                                int levels = 11) {
  JumpBalance jb;
  if (mc.has_generator()) {
    const auto profile = decompose_variation(mc, levels);
    for (const auto& a : profile.atom_estimates)
      if (t >= a.time_lo && t <= a.time_hi) jb.lhs += a.mass;
  }
  if (!lift.grid.empty()) {
    auto it = std::lower_bound(lift.grid.begin(), lift.grid.end(), t);
    if (it == lift.grid.begin()) ++it;
    if (it == lift.grid.end()) --it;
    jb.window_hi = *it;
    jb.window_lo = *(it - 1);
    for (const auto& a : lift.atoms)
      jb.rhs += a.weight * variation_measure(lift.space(), a.curve)
                               .interval_mass(jb.window_lo, jb.window_hi, IntervalKind::left_open);
  } else {
    jb.window_lo = jb.window_hi = t;
    for (const auto& a : lift.atoms)
      jb.rhs += a.weight * variation_measure(lift.space(), a.curve).point_mass(t);
  }
  return jb;
}

// (e_t)_# of the lift on a grid; the exact inverse of check_marginals.
inline MeasureCurve pushforward_curve(const Lift& lift, std::vector<double> grid) {
  check_grid(grid);
  std::vector<DiscreteMeasure> measures;
  for (double t : grid) {
    std::vector<double> wgt(lift.space().size(), 0.0);
    double total = 0.0;
    for (const auto& a : lift.atoms) {
      wgt[a.curve.eval(t)] += a.weight;
      total += a.weight;
    }
    for (auto& v : wgt) v /= total;  // absorb float dust from large atom counts
    measures.push_back(DiscreteMeasure{std::move(wgt)});
  }
  return make_measure_curve(lift.space_ptr, std::move(grid), std::move(measures));
}

struct GeodesicLiftReport {
  double geodesic_fraction = 0.0;  // weight of atoms with Var = d(endpoints)
  double endpoint_gap = 0.0;       // |mean endpoint distance - W1(mu_0, mu_1)|
  double marginal_error = 0.0;
  std::vector<std::pair<double, double>> jump_profile;  // (time, mean jump mass)
  double max_jump_mass = 0.0;
};

// Checks the geodesic characterization: the lift should sit on BV-geodesics
// and realize W1(mu_0, mu_1) as its mean endpoint distance; the per-time
// jump profile supports the continuity criterion.
inline GeodesicLiftReport geodesic_lift_check(const Lift& lift, const MeasureCurve& mc,
                                              double tol = 1e-6) {
  GeodesicLiftReport rep;
  rep.marginal_error = check_marginals(lift, mc);
  double mean_end = 0.0;
  std::map<double, double> profile;
  for (const auto& a : lift.atoms) {
    const auto& sp = lift.space();
    const double var = total_variation(sp, a.curve);
    const double ends = sp.d(a.curve.values.front(), a.curve.eval(1.0));
    if (std::abs(var - ends) <= tol) rep.geodesic_fraction += a.weight;
    mean_end += a.weight * ends;
    for (std::size_t k = 0; k < a.curve.jump_times.size(); ++k)
      profile[a.curve.jump_times[k]] +=
          a.weight * sp.d(a.curve.value_before(k), a.curve.value_after(k));
  }
  const double ends_w1 = solve_w1(mc.space(), mc.front(), mc.back()).distance;
  rep.endpoint_gap = std::abs(mean_end - ends_w1);
  for (const auto& [t, m] : profile) {
    rep.jump_profile.push_back({t, m});
    rep.max_jump_mass = std::max(rep.max_jump_mass, m);
  }
  return rep;
}

// Mean displacement rate of the lift between t and t+h, the grid-scale
// version of the metric-derivative identity.
inline double lift_mean_speed(const Lift& lift, double t, double h) {
  double s = 0.0;
  for (const auto& a : lift.atoms)
    s += a.weight * lift.space().d(a.curve.eval(t), a.curve.eval(t + h));
  return s / std::abs(h);
}

}  // namespace w1
