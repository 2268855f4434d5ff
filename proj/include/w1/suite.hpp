#pragma once

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "w1/current.hpp"
#include "w1/decompose.hpp"
#include "w1/generators.hpp"
#include "w1/lift.hpp"
#include "w1/line_oracle.hpp"
#include "w1/measure_curve.hpp"
#include "w1/registry.hpp"
#include "w1/step_curve.hpp"

namespace w1::suite {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  std::string detail;
};

struct SuiteResult {
  std::vector<CriterionResult> criteria;
  bool all_pass() const {
    for (const auto& c : criteria)
      if (!c.pass) return false;
    return true;
  }
};

namespace detail {

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

struct SuiteCurve {
  std::string name;
  MeasureCurve curve;
};

// Every generator curve exercised by the identity and current-equation
// criteria.  Parameters are sized so the whole sweep stays well inside the
// runtime budget.
inline std::vector<SuiteCurve> suite_curves() {
  std::vector<SuiteCurve> out;
  {
    auto sp = std::make_shared<const MetricSpace>(line_space({0.0, 1.0}));
    out.push_back({"linear_dirac", gen_linear(sp, dirac(*sp, 0), dirac(*sp, 1), dyadic_grid(3))});
    const auto d0 = dirac(*sp, 0), d1 = dirac(*sp, 1);
    out.push_back({"backtracking",
                   gen_piecewise_linear(sp, {0.0, 0.5, 1.0}, {d0, d1, d0}, dyadic_grid(3))});
  }
  {
    const auto inst = w1::detail::nonunique_instance();
    out.push_back(
        {"linear_uniform_thirds", gen_linear(inst.space, inst.mu0, inst.mu1, dyadic_grid(3))});
  }
  out.push_back({"cantor_depth8", gen_cantor(8, dyadic_grid(3))});
  out.push_back({"slice2d", gen_slice2d(0.25, 0.6, 16, slice2d_default_grid(0.6))});
  out.push_back({"periodic_uniform",
                 gen_periodic_sigma(sigma0_uniform(32), periodic_grid(32)).curve});
  out.push_back({"periodic_delta0",
                 gen_periodic_sigma(sigma0_delta0(32), periodic_grid(32)).curve});
  out.push_back({"periodic_cantor8",
                 gen_periodic_sigma(sigma0_cantor(64, 8), periodic_grid(64)).curve});
  return out;
}

inline CriterionResult c1_oracle_equivalence() {
  Timer timer;
  CriterionResult r;
  r.id = 1;
  r.name = "W1 solver vs CDF oracle (500 random line instances)";
  std::mt19937 rng(42);
  std::uniform_int_distribution<std::size_t> size(2, 30);
  double worst_diff = 0.0, worst_gap = 0.0;
  bool ok = true;
  for (int rep = 0; rep < 500 && ok; ++rep) {
    std::vector<double> xs;
    {
      std::uniform_real_distribution<double> step(0.05, 1.5);
      double x = -4.0;
      const std::size_t n = size(rng);
      for (std::size_t i = 0; i < n; ++i) xs.push_back(x += step(rng));
    }
    const auto sp = line_space(xs);
    auto rational = [&rng, &xs]() {
      std::uniform_int_distribution<int> mass(0, 12);
      std::vector<int> k(xs.size());
      int total = 0;
      for (auto& v : k) total += (v = mass(rng));
      if (total == 0) {
        k[0] = 1;
        total = 1;
      }
      DiscreteMeasure mu;
      for (int v : k) mu.weights.push_back(static_cast<double>(v) / total);
      return mu;
    };
    const auto mu = rational(), nu = rational();
    const auto res = solve_w1(sp, mu, nu);
    worst_diff = std::max(worst_diff, std::abs(res.distance - w1_line_oracle(sp, mu, nu)));
    worst_gap = std::max(worst_gap, res.cert.reported_gap);
    ok = worst_diff <= 1e-8 && worst_gap <= 1e-9;
  }
  r.seconds = timer.seconds();
  r.pass = ok && r.seconds < 10.0;
  std::ostringstream os;
  os << "max |solver - oracle| = " << worst_diff << " (tol 1e-8), max duality gap = " << worst_gap
     << " (tol 1e-9)";
  r.detail = os.str();
  return r;
}

inline CriterionResult c2_superposition_identity() {
  Timer timer;
  CriterionResult r;
  r.id = 2;
  r.name = "superposition identity and marginals, N in 2..8";
  double worst_id = 0.0, worst_marg = 0.0;
  for (const auto& sc : suite_curves())
    for (int N = 2; N <= 8; ++N) {
      const auto rc = sc.curve.refined(dyadic_grid(N));
      const auto lift = build_lift(rc, N);
      double inc_sum = 0.0;
      for (double v : curve_increments(rc)) inc_sum += v;
      worst_id = std::max(worst_id, std::abs(lift_variation(lift).total - inc_sum));
      worst_marg = std::max(worst_marg, check_marginals(lift, rc));
    }
  r.seconds = timer.seconds();
  r.pass = worst_id <= 1e-8 && worst_marg <= 1e-9 && r.seconds < 30.0;
  std::ostringstream os;
  os << "max |lift variation - sum of W1 increments| = " << worst_id
     << " (tol 1e-8), max marginal error = " << worst_marg << " (tol 1e-9)";
  r.detail = os.str();
  return r;
}

inline CriterionResult c3_superposition_inequality() {
  Timer timer;
  CriterionResult r;
  r.id = 3;
  r.name = "superposition inequality, built and adversarial lifts";
  // strict instance: three separated unit masses shifting right by one
  auto sp = std::make_shared<const MetricSpace>(line_space({0.0, 1.0, 2.0, 3.0, 4.0, 5.0}));
  const auto mu0 = uniform_on(*sp, {0, 1, 2});
  const auto mu1 = uniform_on(*sp, {1, 2, 3});
  const auto mc = gen_linear(sp, mu0, mu1, dyadic_grid(3));

  std::vector<std::pair<double, double>> intervals;
  for (int i = 0; i < 8; ++i)
    for (int j = i + 1; j <= 8; ++j) intervals.push_back({i / 8.0, j / 8.0});

  const auto good = check_superposition_bound(build_lift(mc, 3), mc, intervals);
  const auto bad_lift = build_adversarial_lift(mc, 3, 4);
  const auto bad = check_superposition_bound(bad_lift, mc, intervals);
  const double slack = bad.full_lift - bad.full_curve;

  bool ok = good.all_bounds_ok && good.full_equality && bad.all_bounds_ok && slack >= 1e-3;

  // bounds also hold for a second adversarial instance on the slice curve
  const auto slice = gen_slice2d(0.25, 0.6, 16, slice2d_default_grid(0.6));
  const auto slice_bad = build_adversarial_lift(slice, 4, 9);
  std::vector<std::pair<double, double>> dyadic4;
  for (int i = 0; i < 16; ++i) dyadic4.push_back({i / 16.0, (i + 1) / 16.0});
  const auto slice_rep =
      check_superposition_bound(slice_bad, slice.refined(dyadic_grid(4)), dyadic4);
  ok = ok && slice_rep.all_bounds_ok;

  r.seconds = timer.seconds();
  r.pass = ok;
  std::ostringstream os;
  os << "bounds hold on " << intervals.size() << "+16 dyadic subintervals; adversarial slack = "
     << slack << " (needs >= 1e-3)";
  r.detail = os.str();
  return r;
}

inline CriterionResult c4_jump_balance() {
  Timer timer;
  CriterionResult r;
  r.id = 4;
  r.name = "jump balance for slice2d (eps=1/4, y=3/5)";
  const auto mc = gen_slice2d(0.25, 0.6, 16, slice2d_default_grid(0.6));
  const auto lift = build_lift(mc, 6);
  const auto jb = jump_balance(lift, mc, 0.6, 11);
  r.seconds = timer.seconds();
  r.pass = std::abs(jb.lhs - 0.375) <= 1e-6 && std::abs(jb.rhs - 0.375) <= 1e-6;
  std::ostringstream os;
  os << "lhs = " << jb.lhs << ", rhs = " << jb.rhs << ", expected 0.375 (tol 1e-6, depth 11)";
  r.detail = os.str();
  return r;
}

inline CriterionResult c5_geodesic_characterization() {
  Timer timer;
  CriterionResult r;
  r.id = 5;
  r.name = "geodesic characterization incl. periodic constructions";
  bool ok = true;
  std::ostringstream os;

  {
    auto sp = std::make_shared<const MetricSpace>(line_space({0.0, 1.0}));
    const auto mc = gen_linear(sp, dirac(*sp, 0), dirac(*sp, 1), dyadic_grid(6));
    const auto rep = geodesic_lift_check(build_lift(mc, 6), mc);
    const bool here = is_bv_geodesic(mc, 1e-6) && is_constant_speed(mc, 1e-6) &&
                      rep.geodesic_fraction >= 1.0 - 1e-12 && rep.endpoint_gap <= 1e-6;
    ok = ok && here;
    os << "linear_dirac fraction=" << rep.geodesic_fraction << "; ";
  }
  for (const std::string kind : {"uniform", "delta0", "cantor"}) {
    const std::size_t K = kind == "cantor" ? 64 : 32;
    const auto ps = gen_periodic_sigma(w1::detail::sigma0_preset(kind, K, 8), periodic_grid(K));
    std::vector<LiftAtom> atoms;
    for (std::size_t a = 0; a < K; ++a) atoms.push_back({ps.lift_curves[a], ps.lift_weights[a]});
    const auto lift = make_lift(ps.curve.space_ptr, std::move(atoms), periodic_grid(K));
    const auto rep = geodesic_lift_check(lift, ps.curve);
    const bool here = is_bv_geodesic(ps.curve, 1e-6) && is_constant_speed(ps.curve, 1e-6) &&
                      rep.geodesic_fraction >= 1.0 - 1e-12 && rep.endpoint_gap <= 1e-6 &&
                      rep.marginal_error <= 1e-9;
    ok = ok && here;
    os << "periodic_" << kind << " fraction=" << rep.geodesic_fraction << "; ";
  }
  {
    auto sp = std::make_shared<const MetricSpace>(line_space({0.0, 1.0}));
    const auto d0 = dirac(*sp, 0), d1 = dirac(*sp, 1);
    const auto back = gen_piecewise_linear(sp, {0.0, 0.5, 1.0}, {d0, d1, d0}, dyadic_grid(4));
    const auto rep = geodesic_lift_check(build_lift(back, 4), back);
    const bool here = !is_bv_geodesic(back, 1e-6) && rep.geodesic_fraction == 0.0;
    ok = ok && here;
    os << "backtracking fraction=" << rep.geodesic_fraction;
  }
  r.seconds = timer.seconds();
  r.pass = ok;
  r.detail = os.str();
  return r;
}

inline CriterionResult c6_current_equation() {
  Timer timer;
  CriterionResult r;
  r.id = 6;
  r.name = "current equation: residuals, metric speed, a priori bound";
  double worst_res = 0.0, worst_speed = 0.0;
  for (const auto& sc : suite_curves()) {
    const int N = 5;
    const auto rc = sc.curve.refined(dyadic_grid(N));
    const auto lift = build_lift(rc, N);
    for (std::size_t i = 0; i < rc.steps(); ++i) {
      const auto v = extract_velocity(lift, rc, i);
      for (double res : current_residual(rc, v, i)) worst_res = std::max(worst_res, std::abs(res));
      const auto si = speed_identity(rc, v, i);
      worst_speed = std::max(worst_speed, std::abs(si.lhs - si.rhs));
    }
  }

  // a priori bound on 200 randomized feasible fields
  std::mt19937 rng(7);
  bool bound_ok = true;
  double worst_defect = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    std::uniform_int_distribution<std::size_t> size(2, 8);
    std::uniform_real_distribution<double> coord(-2.0, 2.0);
    const std::size_t n = size(rng);
    std::vector<std::vector<double>> pts;
    while (pts.size() < n) {
      std::vector<double> p{coord(rng), coord(rng)};
      bool dup = false;
      for (const auto& q : pts)
        if (euclidean(p, q) < 1e-6) dup = true;
      if (!dup) pts.push_back(p);
    }
    auto sp = std::make_shared<const MetricSpace>(make_space({}, pts, std::nullopt));
    std::uniform_int_distribution<int> mass(0, 9);
    auto rational = [&]() {
      std::vector<int> k(n);
      int total = 0;
      for (auto& v : k) total += (v = mass(rng));
      if (total == 0) {
        k[0] = 1;
        total = 1;
      }
      DiscreteMeasure mu;
      for (int v : k) mu.weights.push_back(static_cast<double>(v) / total);
      return mu;
    };
    const auto mu = rational(), nu = rational();
    const auto mc = gen_linear(sp, mu, nu, dyadic_grid(1));

    // random feasible coupling: greedy fill over shuffled supports
    std::vector<std::size_t> rows, cols;
    for (std::size_t x = 0; x < n; ++x) {
      if (mc.measures[0](x) > 0.0) rows.push_back(x);
      if (mc.measures[1](x) > 0.0) cols.push_back(x);
    }
    std::shuffle(rows.begin(), rows.end(), rng);
    std::shuffle(cols.begin(), cols.end(), rng);
    StepVelocity v;
    v.t0 = 0.0;
    v.t1 = 0.5;
    std::size_t ri = 0, ci = 0;
    double mrow = mc.measures[0](rows[0]), mcol = mc.measures[1](cols[0]);
    while (ri < rows.size() && ci < cols.size()) {
      const double m = std::min(mrow, mcol);
      if (m > 0.0 && rows[ri] != cols[ci])
        v.rate[{rows[ri], cols[ci]}] += m / (v.h() * mc.measures[0](rows[ri]));
      mrow -= m;
      mcol -= m;
      if (mrow <= 0.0 && ++ri < rows.size()) mrow = mc.measures[0](rows[ri]);
      if (mcol <= 0.0 && ++ci < cols.size()) mcol = mc.measures[1](cols[ci]);
    }
    const auto si = speed_identity(mc, v, 0);
    worst_defect = std::max(worst_defect, si.lhs - si.rhs);
    bound_ok = bound_ok && si.lhs <= si.rhs + 1e-8;
  }

  r.seconds = timer.seconds();
  r.pass = worst_res <= 1e-9 && worst_speed <= 1e-6 && bound_ok;
  std::ostringstream os;
  os << "max residual = " << worst_res << " (tol 1e-9), max |speed lhs - rhs| = " << worst_speed
     << " (tol 1e-6), a priori bound defect = " << worst_defect << " over 200 fields";
  r.detail = os.str();
  return r;
}

inline CriterionResult c7_cantor_curve() {
  Timer timer;
  CriterionResult r;
  r.id = 7;
  r.name = "Cantor curve: variation, plateau derivative, residual";
  const auto mc = gen_cantor(8, dyadic_grid(8));
  const double var = curve_variation(mc);
  const double md1 = metric_derivative(mc, 0.5, 0.125);
  const double md2 = metric_derivative(mc, 0.45, 0.0625);
  const auto profile = decompose_variation(mc, 10);
  const double bound = 1.0 - std::pow(2.0 / 3.0, 8) - 1e-6;
  r.seconds = timer.seconds();
  r.pass = std::abs(var - 1.0) <= 1e-9 && md1 == 0.0 && md2 == 0.0 &&
           profile.residual_estimate >= bound;
  std::ostringstream os;
  os << "variation = " << var << " (tol 1e-9), plateau derivatives = " << md1 << ", " << md2
     << ", residual = " << profile.residual_estimate << " (needs >= " << bound << ")";
  r.detail = os.str();
  return r;
}

inline CriterionResult c8_nonuniqueness() {
  Timer timer;
  CriterionResult r;
  r.id = 8;
  r.name = "non-uniqueness witness on the uniform instance";
  const auto rep = run_example({"nonunique_lifts", {}}, "");
  r.seconds = timer.seconds();
  r.pass = rep.all_pass();
  std::ostringstream os;
  for (const auto& c : rep.checks)
    if (!c.pass) os << "failed: " << c.name << " (lhs=" << c.lhs << " rhs=" << c.rhs << "); ";
  if (r.pass) os << "two lifts differ in atoms, pushforwards and variations agree to 1e-9";
  r.detail = os.str();
  return r;
}

inline CriterionResult c9_bv_equivalences() {
  Timer timer;
  CriterionResult r;
  r.id = 9;
  r.name = "BV-equivalence checks on 100 random step curves";
  std::mt19937 rng(31415);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  bool ok = true;
  double worst = 0.0;
  for (int rep = 0; rep < 100 && ok; ++rep) {
    std::uniform_int_distribution<std::size_t> size(2, 6);
    const std::size_t n = size(rng);
    std::vector<std::vector<double>> pts;
    while (pts.size() < n) {
      std::vector<double> p{coord(rng), coord(rng)};
      bool dup = false;
      for (const auto& q : pts)
        if (euclidean(p, q) < 1e-6) dup = true;
      if (!dup) pts.push_back(p);
    }
    const auto sp = make_space({}, pts, std::nullopt);

    std::uniform_int_distribution<std::size_t> njumps(0, 8);
    std::uniform_int_distribution<int> slot(1, (1 << 12) - 2);
    std::uniform_int_distribution<std::size_t> point(0, n - 1);
    const std::size_t J = njumps(rng);
    std::vector<int> slots;
    while (slots.size() < J) {
      const int s = slot(rng);
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
    const auto u = make_step_curve(n, times, values);
    const auto res = check_bv_equivalences(sp, u, 1e-6);
    worst = std::max(worst, std::abs(res.sup_diff_quotient - res.variation));
    ok = ok && res.all_ok();
  }
  r.seconds = timer.seconds();
  r.pass = ok && worst <= 1e-6;
  std::ostringstream os;
  os << "all inequality checks passed; max |sup_h integral - Var| = " << worst << " (tol 1e-6)";
  r.detail = os.str();
  return r;
}

}  // namespace detail

// Runs every acceptance criterion; the machine-readable summary and the
// nonzero-exit contract live with the callers (CLI and test binary).
inline SuiteResult run_suite() {
  SuiteResult res;
  res.criteria.push_back(detail::c1_oracle_equivalence());
  res.criteria.push_back(detail::c2_superposition_identity());
  res.criteria.push_back(detail::c3_superposition_inequality());
  res.criteria.push_back(detail::c4_jump_balance());
  res.criteria.push_back(detail::c5_geodesic_characterization());
  res.criteria.push_back(detail::c6_current_equation());
  res.criteria.push_back(detail::c7_cantor_curve());
  res.criteria.push_back(detail::c8_nonuniqueness());
  res.criteria.push_back(detail::c9_bv_equivalences());
  return res;
}

}  // namespace w1::suite
