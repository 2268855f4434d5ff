#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "w1/current.hpp"
#include "w1/decompose.hpp"
#include "w1/generators.hpp"
#include "w1/io.hpp"
#include "w1/lift.hpp"
#include "w1/line_oracle.hpp"
#include "w1/measure_curve.hpp"

namespace w1 {

// A named example instance with string-typed parameters (as they arrive from
// the CLI).  Unknown names and malformed parameters are input errors.
struct ExampleSpec {
  std::string name;
  std::map<std::string, std::string> params;

  double num(const std::string& key, double fallback) const {
    auto it = params.find(key);
    if (it == params.end()) return fallback;
    try {
      return std::stod(it->second);
    } catch (...) {
      throw input_error("example parameter " + key + ": not a number: " + it->second);
    }
  }
  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  }
};

struct ExampleCheck {
  std::string name;
  bool pass = false;
  double lhs = 0.0, rhs = 0.0, tol = 0.0;
};

struct ExampleReport {
  std::string example;
  io::json params = io::json::object();
  std::vector<ExampleCheck> checks;
  std::vector<std::string> artifacts;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  void check_close(const std::string& name, double lhs, double rhs, double tol) {
    checks.push_back({name, std::abs(lhs - rhs) <= tol, lhs, rhs, tol});
  }
  void check_le(const std::string& name, double lhs, double rhs, double tol) {
    checks.push_back({name, lhs <= rhs + tol, lhs, rhs, tol});
  }
  void check_true(const std::string& name, bool ok) {
    checks.push_back({name, ok, ok ? 1.0 : 0.0, 1.0, 0.0});
  }
  io::json to_json() const {
    io::json j;
    j["example"] = example;
    j["params"] = params;
    j["pass"] = all_pass();
    io::json rows = io::json::array();
    for (const auto& c : checks)
      rows.push_back(
          {{"name", c.name}, {"pass", c.pass}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"tol", c.tol}});
    j["checks"] = rows;
    j["artifacts"] = artifacts;
    return j;
  }
};

namespace detail {

inline void emit(ExampleReport& rep, const std::string& out_dir, const std::string& file,
                 const std::string& content) {
  if (out_dir.empty()) return;
  io::write_file(out_dir + "/" + file, content);
  rep.artifacts.push_back(file);
}

// Shared instance of the nonuniqueness example: uniform thirds on
// [-2,-1.5,-1] moving to uniform thirds on [1,1.5,2].
struct NonuniqueInstance {
  std::shared_ptr<const MetricSpace> space;
  DiscreteMeasure mu0, mu1;
  std::vector<std::size_t> monotone_map, antitone_map;
};

inline NonuniqueInstance nonunique_instance() {
  NonuniqueInstance inst;
  inst.space = std::make_shared<const MetricSpace>(line_space({-2, -1.5, -1, 1, 1.5, 2}));
  inst.mu0 = uniform_on(*inst.space, {0, 1, 2});
  inst.mu1 = uniform_on(*inst.space, {3, 4, 5});
  inst.monotone_map = {3, 4, 5, 3, 4, 5};
  inst.antitone_map = {5, 4, 3, 3, 4, 5};
  return inst;
}

inline ExampleReport run_nonunique(const ExampleSpec& spec, const std::string& out_dir) {
  ExampleReport rep;
  rep.example = spec.name;
  const int level = static_cast<int>(spec.num("level", 4));
  rep.params["level"] = level;

  const auto inst = nonunique_instance();
  const auto& sp = *inst.space;
  const auto res = solve_w1(sp, inst.mu0, inst.mu1);
  rep.check_close("w1_distance", res.distance, 3.0, 1e-9);
  rep.check_close("w1_vs_cdf_oracle", res.distance, w1_line_oracle(sp, inst.mu0, inst.mu1), 1e-9);

  // on this instance every coupling is optimal, the product coupling included
  Coupling product;
  product.n = sp.size();
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 3; y < 6; ++y) product.entries.push_back({x, y, 1.0 / 9.0});
  rep.check_true("product_coupling_optimal", is_optimal(sp, product, 1e-9));

  const auto mc = gen_linear(inst.space, inst.mu0, inst.mu1, dyadic_grid(level));
  const auto lift_a = map_interpolation_lift(inst.space, inst.mu0, inst.monotone_map, level);
  const auto lift_b = map_interpolation_lift(inst.space, inst.mu0, inst.antitone_map, level);

  std::size_t differing = 0;
  for (const auto& a : lift_a.atoms) {
    bool found = false;
    for (const auto& b : lift_b.atoms)
      if (a.curve == b.curve && std::abs(a.weight - b.weight) <= 1e-15) found = true;
    if (!found) ++differing;
  }
  rep.check_true("lifts_differ_in_atoms", differing > 0);
  rep.check_le("lift_a_marginal_error", check_marginals(lift_a, mc), 0.0, 1e-9);
  rep.check_le("lift_b_marginal_error", check_marginals(lift_b, mc), 0.0, 1e-9);

  const auto push_a = pushforward_curve(lift_a, mc.grid);
  const auto push_b = pushforward_curve(lift_b, mc.grid);
  double tv = 0.0;
  for (std::size_t k = 0; k < mc.grid.size(); ++k) {
    double s = 0.0;
    for (std::size_t x = 0; x < sp.size(); ++x)
      s += std::abs(push_a.measures[k](x) - push_b.measures[k](x));
    tv = std::max(tv, s / 2.0);
  }
  rep.check_le("pushforward_tv_distance", tv, 0.0, 1e-9);
  rep.check_close("lift_variations_equal", lift_variation(lift_a).total,
                  lift_variation(lift_b).total, 1e-9);
  rep.check_close("geodesic_fraction_a", geodesic_lift_check(lift_a, mc).geodesic_fraction, 1.0,
                  1e-12);
  rep.check_close("geodesic_fraction_b", geodesic_lift_check(lift_b, mc).geodesic_fraction, 1.0,
                  1e-12);

  emit(rep, out_dir, "nonunique_lift_monotone.csv", io::lift_csv(lift_a));
  emit(rep, out_dir, "nonunique_lift_antitone.csv", io::lift_csv(lift_b));
  emit(rep, out_dir, "nonunique_increments.csv", io::increments_csv(mc));
  return rep;
}

// L-shaped unit-length polyline with corner at arc length `a`, sampled at M
// segment midpoints; the half delta + half arc measure moves its delta mass
// from one end to the other.
struct AcInstance {
  std::shared_ptr<const MetricSpace> space;
  DiscreteMeasure mu0, mu1;
  std::size_t segments;
  double endpoint_distance;
  Lift conveyor;  // the AC-style lift translating along the polyline
};

inline AcInstance ac_instance(std::size_t M, double a) {
  if (M < 4 || (M & (M - 1)) != 0)
    throw input_error("ac_not_enough: segments must be a power of two >= 4");
  if (std::abs(a * static_cast<double>(M) - std::round(a * static_cast<double>(M))) > 1e-12 ||
      a <= 0.0 || a >= 1.0)
    throw input_error("ac_not_enough: corner must sit on a segment boundary");
  auto point_at = [a](double s) {
    return s <= a ? std::vector<double>{s, 0.0} : std::vector<double>{a, s - a};
  };
  std::vector<std::vector<double>> pts;
  pts.push_back(point_at(0.0));  // index 0: p0
  const double w = 1.0 / static_cast<double>(M);
  for (std::size_t i = 0; i < M; ++i) pts.push_back(point_at((i + 0.5) * w));  // 1..M: midpoints
  pts.push_back(point_at(1.0));  // index M+1: pM

  AcInstance inst;
  inst.segments = M;
  inst.space = std::make_shared<const MetricSpace>(make_space({}, pts, std::nullopt));
  inst.endpoint_distance = inst.space->d(0, M + 1);
  std::vector<double> w0(M + 2, 0.0), w1v(M + 2, 0.0);
  w0[0] = 0.5;
  w1v[M + 1] = 0.5;
  for (std::size_t i = 1; i <= M; ++i) w0[i] = w1v[i] = 0.5 * w;
  inst.mu0 = make_measure(*inst.space, w0);
  inst.mu1 = make_measure(*inst.space, w1v);

  // conveyor atoms: wait at p0 then follow the arc / follow the arc then
  // wait at pM; alpha on the M-grid, half weight per family
  std::vector<LiftAtom> atoms;
  for (std::size_t j = 0; j < M; ++j) {
    {
      std::vector<double> times;
      std::vector<std::size_t> values{0};
      for (std::size_t k = j + 1; k <= M; ++k) {
        times.push_back(static_cast<double>(k) * w);
        values.push_back(k - j);  // midpoint q_{k-j-1} has index k-j
      }
      atoms.push_back({make_step_curve(M + 2, times, values), 0.5 * w});
    }
    {
      std::vector<double> times;
      std::vector<std::size_t> values{j + 1};  // starts at q_j
      for (std::size_t k = 1; k <= M; ++k) {
        times.push_back(static_cast<double>(k) * w);
        values.push_back(k + j < M ? k + j + 1 : M + 1);
      }
      atoms.push_back({make_step_curve(M + 2, times, values), 0.5 * w});
    }
  }
  inst.conveyor = make_lift(inst.space, std::move(atoms), periodic_grid(M));
  return inst;
}

inline ExampleReport run_ac_not_enough(const ExampleSpec& spec, const std::string& out_dir) {
  ExampleReport rep;
  rep.example = spec.name;
  const std::size_t M = static_cast<std::size_t>(spec.num("segments", 16));
  const double a = spec.num("corner", 0.625);
  const int level = static_cast<int>(std::round(std::log2(static_cast<double>(M))));
  rep.params["segments"] = M;
  rep.params["corner"] = a;
  rep.params["level"] = level;

  const auto inst = ac_instance(M, a);
  const auto mc = gen_linear(inst.space, inst.mu0, inst.mu1, dyadic_grid(level));

  rep.check_true("curve_is_geodesic", is_bv_geodesic(mc, 1e-9));
  rep.check_true("curve_is_constant_speed", is_constant_speed(mc, 1e-9));
  rep.check_close("variation_is_half_endpoint_distance", curve_variation(mc),
                  inst.endpoint_distance / 2.0, 1e-9);

  rep.check_le("conveyor_marginal_error", check_marginals(inst.conveyor, mc), 0.0, 1e-9);
  const auto built = build_lift(mc, level);
  const double conveyor_var = lift_variation(inst.conveyor).total;
  const double built_var = lift_variation(built).total;
  rep.check_close("built_lift_attains_variation", built_var, curve_variation(mc), 1e-9);
  // no AC-style lift is optimal here: the conveyor pays the full arc length
  rep.check_true("conveyor_strictly_suboptimal", conveyor_var > built_var + 1e-3);
  rep.check_close("built_lift_geodesic_fraction",
                  geodesic_lift_check(built, mc).geodesic_fraction, 1.0, 1e-12);
  rep.check_true("conveyor_not_geodesic_lift",
                 geodesic_lift_check(inst.conveyor, mc).geodesic_fraction < 1.0 - 1e-6);

  const auto bound = check_superposition_bound(inst.conveyor, mc, {{0.0, 1.0}});
  rep.check_true("superposition_bound_holds", bound.all_bounds_ok);
  rep.check_true("superposition_strict_for_conveyor", !bound.full_equality);

  emit(rep, out_dir, "ac_conveyor_lift.csv", io::lift_csv(inst.conveyor));
  emit(rep, out_dir, "ac_built_lift.csv", io::lift_csv(built));
  emit(rep, out_dir, "ac_increments.csv", io::increments_csv(mc));
  return rep;
}

inline ExampleReport run_slice2d(const ExampleSpec& spec, const std::string& out_dir) {
  ExampleReport rep;
  rep.example = spec.name;
  const double eps = spec.num("eps", 0.25);
  const double y = spec.num("y", 0.6);
  const std::size_t cells = static_cast<std::size_t>(spec.num("cells", 16));
  const int level = static_cast<int>(spec.num("level", 6));
  const int levels = static_cast<int>(spec.num("levels", 11));
  rep.params["eps"] = eps;
  rep.params["y"] = y;
  rep.params["cells"] = cells;
  rep.params["level"] = level;
  rep.params["levels"] = levels;

  const auto mc = gen_slice2d(eps, y, cells, slice2d_default_grid(y));
  const double jump = (1.0 - eps) / 2.0;
  rep.check_close("variation_is_jump_mass", curve_variation(mc), jump, 1e-9);

  const auto profile = decompose_variation(mc, levels);
  rep.check_true("single_atom_detected", profile.atom_estimates.size() == 1);
  if (!profile.atom_estimates.empty()) {
    rep.check_close("atom_mass", profile.atom_estimates[0].mass, jump, 1e-6);
    rep.check_le("atom_time_error", std::abs(profile.atom_estimates[0].time - y),
                 std::ldexp(1.0, -levels), 1e-12);
  }
  rep.check_le("ac_mass", profile.ac_mass, 0.0, 1e-9);

  const auto lift = build_lift(mc, level);
  rep.check_le("lift_marginal_error", check_marginals(lift, mc.refined(dyadic_grid(level))), 0.0,
               1e-9);
  const auto jb = jump_balance(lift, mc, y, levels);
  rep.check_close("jump_balance_lhs", jb.lhs, jump, 1e-6);
  rep.check_close("jump_balance_rhs", jb.rhs, jump, 1e-6);
  rep.check_close("jump_balance_match", jb.lhs, jb.rhs, 1e-6);

  // measures before and after the jump, figure-style
  std::string panel = "cell_center,weight_before,weight_after\n";
  const auto before = mc.sample(y);
  const auto after = mc.sample(1.0);
  for (std::size_t i = 0; i < cells; ++i)
    panel += io::fmt12(mc.space().coord1d(i)) + "," + io::fmt12(before(i)) + "," +
             io::fmt12(after(i)) + "\n";
  emit(rep, out_dir, "slice2d_measures.csv", panel);
  emit(rep, out_dir, "slice2d_lift.csv", io::lift_csv(lift));
  return rep;
}

inline ExampleReport run_cantor(const ExampleSpec& spec, const std::string& out_dir) {
  ExampleReport rep;
  rep.example = spec.name;
  const int depth = static_cast<int>(spec.num("depth", 8));
  const int grid_level = static_cast<int>(spec.num("grid_level", 8));
  const int lift_level = static_cast<int>(spec.num("lift_level", 6));
  const int levels = static_cast<int>(spec.num("levels", 10));
  rep.params["depth"] = depth;
  rep.params["grid_level"] = grid_level;
  rep.params["lift_level"] = lift_level;
  rep.params["levels"] = levels;

  const auto mc = gen_cantor(depth, dyadic_grid(grid_level));
  rep.check_close("variation", curve_variation(mc), 1.0, 1e-9);
  rep.check_close("plateau_derivative", metric_derivative(mc, 0.5, 0.125), 0.0, 1e-12);
  rep.check_true("is_geodesic", is_bv_geodesic(mc, 1e-9));
  rep.check_true("not_constant_speed", !is_constant_speed(mc, 1e-6));

  const auto profile = decompose_variation(mc, levels);
  rep.check_le("atom_mass", profile.atom_mass, 0.0, 1e-9);
  rep.check_le("ac_mass", profile.ac_mass, 0.0, 1e-6);
  const double bound = 1.0 - std::pow(2.0 / 3.0, depth) - 1e-6;
  rep.check_true("residual_dominates", profile.residual_estimate >= bound);

  const auto lift = build_lift(mc, lift_level);
  rep.check_le("lift_marginal_error", check_marginals(lift, mc.refined(dyadic_grid(lift_level))),
               0.0, 1e-9);
  const auto geo = geodesic_lift_check(lift, mc);
  rep.check_close("geodesic_fraction", geo.geodesic_fraction, 1.0, 1e-12);
  rep.check_le("endpoint_gap", geo.endpoint_gap, 0.0, 1e-6);

  std::string cs = "t,c\n";
  for (int i = 0; i <= 512; ++i) {
    const double t = i / 512.0;
    cs += io::fmt12(t) + "," + io::fmt12(cantor_function(depth, t)) + "\n";
  }
  emit(rep, out_dir, "cantor_function.csv", cs);
  emit(rep, out_dir, "cantor_increments.csv", io::increments_csv(mc));
  return rep;
}

inline std::vector<double> sigma0_preset(const std::string& kind, std::size_t K, int depth) {
  if (kind == "uniform") return sigma0_uniform(K);
  if (kind == "delta0") return sigma0_delta0(K);
  if (kind == "cantor") return sigma0_cantor(K, depth);
  throw input_error("periodic_sigma: unknown sigma0 preset: " + kind);
}

inline ExampleReport run_periodic(const ExampleSpec& spec, const std::string& out_dir) {
  ExampleReport rep;
  rep.example = spec.name;
  const std::string kind = spec.str("sigma0", "cantor");
  const std::size_t K = static_cast<std::size_t>(spec.num("K", 64));
  const int depth = static_cast<int>(spec.num("depth", 8));
  rep.params["sigma0"] = kind;
  rep.params["K"] = K;
  if (kind == "cantor") rep.params["depth"] = depth;

  const auto sigma0 = sigma0_preset(kind, K, depth);
  const auto ps = gen_periodic_sigma(sigma0, periodic_grid(K));
  std::vector<LiftAtom> atoms;
  for (std::size_t a = 0; a < K; ++a) atoms.push_back({ps.lift_curves[a], ps.lift_weights[a]});
  const auto lift = make_lift(ps.curve.space_ptr, std::move(atoms), periodic_grid(K));

  rep.check_true("is_geodesic", is_bv_geodesic(ps.curve, 1e-6));
  rep.check_true("is_constant_speed", is_constant_speed(ps.curve, 1e-6));
  rep.check_le("lift_marginal_error", check_marginals(lift, ps.curve), 0.0, 1e-9);
  rep.check_close("mean_lift_variation_vs_curve", lift_variation(lift).total,
                  curve_variation(ps.curve), 1e-9);
  const auto geo = geodesic_lift_check(lift, ps.curve);
  rep.check_close("geodesic_fraction", geo.geodesic_fraction, 1.0, 1e-12);
  rep.check_le("endpoint_gap", geo.endpoint_gap, 0.0, 1e-6);

  std::string s0 = "position,mass\n";
  for (std::size_t j = 0; j < K; ++j)
    s0 += io::fmt12(static_cast<double>(j) / static_cast<double>(K)) + "," +
          io::fmt12(sigma0[j]) + "\n";
  emit(rep, out_dir, "periodic_sigma0.csv", s0);

  std::string ext = "position,mass\n";
  for (int n = -1; n <= 1; ++n)
    for (std::size_t j = 0; j < K; ++j)
      ext += io::fmt12(n + static_cast<double>(j) / static_cast<double>(K)) + "," +
             io::fmt12(sigma0[j]) + "\n";
  emit(rep, out_dir, "periodic_sigma_extension.csv", ext);
  emit(rep, out_dir, "periodic_trajectories.csv",
       io::trajectories_csv(lift, ps.curve.grid));
  emit(rep, out_dir, "periodic_increments.csv", io::increments_csv(ps.curve));
  return rep;
}

}  // namespace detail

// Runs one named example end to end: builds the curve and lift(s), runs all
// applicable verifications, emits CSV plot data when out_dir is non-empty.
inline ExampleReport run_example(const ExampleSpec& spec, const std::string& out_dir = "") {
  if (spec.name == "nonunique_lifts") return detail::run_nonunique(spec, out_dir);
  if (spec.name == "ac_not_enough") return detail::run_ac_not_enough(spec, out_dir);
  if (spec.name == "slice2d") return detail::run_slice2d(spec, out_dir);
  if (spec.name == "cantor_cs") return detail::run_cantor(spec, out_dir);
  if (spec.name == "periodic_sigma") return detail::run_periodic(spec, out_dir);
  throw input_error("unknown example: " + spec.name);
}

inline std::vector<std::string> example_names() {
  return {"nonunique_lifts", "ac_not_enough", "slice2d", "cantor_cs", "periodic_sigma"};
}

}  // namespace w1
