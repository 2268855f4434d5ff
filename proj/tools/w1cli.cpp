// Command-line front end: space validation, W1 solves, lift construction and
// verification, curve diagnostics, current-equation extraction, the example
// registry and the full verification suite.
//
// Exit codes: 0 = all checks pass, 1 = verification failure, 2 = input error.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "w1/current.hpp"
#include "w1/decompose.hpp"
#include "w1/io.hpp"
#include "w1/lift.hpp"
#include "w1/registry.hpp"
#include "w1/suite.hpp"

namespace {

using w1::io::json;

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw w1::input_error("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw w1::input_error("bad JSON in " + path + ": " + e.what());
  }
  return j;
}

struct Options {
  std::string space_file, mu_file, nu_file, curve_file, lift_file;
  std::string out_dir = ".", csv_file, coupling_file, out_file;
  int level = 4;
  int levels = 11;
  double tol = 1e-6;
  bool as_json = false;
  std::string example_name;
  std::vector<std::string> sets;
  std::string eps, y, depth, grid, sigma0, example_level;
};

w1::MeasureCurve load_curve(const Options& opt) {
  return w1::io::measure_curve_from_json(load_json(opt.curve_file));
}

int emit_report(const json& j, bool as_json, int code) {
  if (as_json) std::cout << j.dump(2) << "\n";
  return code;
}

int cmd_space_validate(const Options& opt) {
  const json j = load_json(opt.space_file);
  w1::MetricSpace s;
  // assemble without the constructor so that violations are reported, not thrown
  if (j.contains("labels") && !j["labels"].is_null())
    s.labels = j["labels"].get<std::vector<std::string>>();
  if (j.contains("coords") && !j["coords"].is_null())
    s.coords = j["coords"].get<std::vector<std::vector<double>>>();
  if (j.contains("dist") && !j["dist"].is_null())
    s.dist = j["dist"].get<std::vector<std::vector<double>>>();
  if (!s.coords && s.dist.empty()) throw w1::input_error("space descriptor: need coords or dist");
  if (s.dist.empty() && s.coords) {
    const std::size_t n = s.coords->size();
    s.dist.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < n; ++k)
        s.dist[i][k] = w1::euclidean((*s.coords)[i], (*s.coords)[k]);
  }
  const auto violations = w1::validate_metric(s);
  json rep;
  rep["valid"] = violations.empty();
  json rows = json::array();
  for (const auto& v : violations)
    rows.push_back({{"axiom", v.axiom}, {"i", v.i}, {"j", v.j}, {"k", v.k}, {"detail", v.detail}});
  rep["violations"] = rows;
  if (!opt.as_json) {
    if (violations.empty())
      std::cout << "valid metric space (" << s.dist.size() << " points)\n";
    for (const auto& v : violations)
      std::cout << "violation: " << v.axiom << " at (" << v.i << "," << v.j << "," << v.k << ") "
                << v.detail << "\n";
  }
  return emit_report(rep, opt.as_json, violations.empty() ? 0 : 1);
}

int cmd_w1_dist(const Options& opt) {
  const auto space = w1::io::space_from_json(load_json(opt.space_file));
  const auto mu = w1::io::measure_from_json(space, load_json(opt.mu_file));
  const auto nu = w1::io::measure_from_json(space, load_json(opt.nu_file));
  const auto res = w1::solve_w1(space, mu, nu);
  json rep;
  rep["distance"] = res.distance;
  rep["duality_gap"] = res.cert.reported_gap;
  rep["support"] = res.coupling.entries.size();
  if (!opt.coupling_file.empty()) {
    w1::io::write_file(opt.coupling_file, w1::io::coupling_to_json(res.coupling).dump(2) + "\n");
    rep["coupling_file"] = opt.coupling_file;
  }
  if (!opt.as_json)
    std::cout << "W1 = " << w1::io::fmt12(res.distance)
              << " (duality gap " << w1::io::fmt12(res.cert.reported_gap) << ")\n";
  return emit_report(rep, opt.as_json, 0);
}

int cmd_lift_build(const Options& opt) {
  const auto mc = load_curve(opt);
  const auto lift = w1::build_lift(mc, opt.level);
  const std::string out = opt.out_file.empty() ? "lift.json" : opt.out_file;
  w1::io::write_file(out, w1::io::lift_to_json(lift).dump(2) + "\n");
  if (!opt.as_json)
    std::cout << "built lift with " << lift.atoms.size() << " atoms at level " << opt.level
              << " -> " << out << "\n";
  json rep;
  rep["atoms"] = lift.atoms.size();
  rep["pruned_mass"] = lift.pruned_mass;
  rep["out"] = out;
  return emit_report(rep, opt.as_json, 0);
}

int cmd_lift_verify(const Options& opt) {
  const auto mc = load_curve(opt);
  const auto lift = w1::io::lift_from_json(load_json(opt.lift_file));
  const double marg = w1::check_marginals(lift, mc);
  double inc_sum = 0.0;
  for (double v : w1::curve_increments(mc)) inc_sum += v;
  const double lv = w1::lift_variation(lift).total;
  const auto geo = w1::geodesic_lift_check(lift, mc, opt.tol);
  const bool pass = marg <= 1e-9 && inc_sum <= lv + 1e-8;
  json rep;
  rep["marginal_error"] = marg;
  rep["curve_variation"] = inc_sum;
  rep["lift_variation"] = lv;
  rep["variation_identity_gap"] = std::abs(lv - inc_sum);
  rep["geodesic_fraction"] = geo.geodesic_fraction;
  rep["endpoint_gap"] = geo.endpoint_gap;
  rep["pass"] = pass;
  if (!opt.as_json)
    std::cout << (pass ? "PASS" : "FAIL") << ": marginal error " << w1::io::fmt12(marg)
              << ", curve variation " << w1::io::fmt12(inc_sum) << ", lift variation "
              << w1::io::fmt12(lv) << "\n";
  return emit_report(rep, opt.as_json, pass ? 0 : 1);
}

int cmd_curve_var(const Options& opt) {
  const auto mc = load_curve(opt);
  const double var = w1::curve_variation(mc);
  if (!opt.as_json) std::cout << "W1-variation = " << w1::io::fmt12(var) << "\n";
  return emit_report(json{{"variation", var}}, opt.as_json, 0);
}

int cmd_curve_decompose(const Options& opt) {
  const auto mc = load_curve(opt);
  const auto profile = w1::decompose_variation(mc, opt.levels);
  json rep;
  rep["levels"] = profile.levels;
  rep["total_variation"] = profile.total_variation;
  rep["atom_mass"] = profile.atom_mass;
  rep["ac_mass"] = profile.ac_mass;
  rep["residual_estimate"] = profile.residual_estimate;
  rep["refinement_delta"] = profile.refinement_delta;
  json atoms = json::array();
  for (const auto& a : profile.atom_estimates)
    atoms.push_back({{"time", a.time}, {"mass", a.mass}});
  rep["atoms"] = atoms;
  if (!opt.csv_file.empty()) {
    std::string csv = "t_lo,t_hi,w1_increment,density\n";
    for (std::size_t i = 0; i < profile.interval_masses.size(); ++i)
      csv += w1::io::fmt12(profile.cell_grid[i]) + "," + w1::io::fmt12(profile.cell_grid[i + 1]) +
             "," + w1::io::fmt12(profile.interval_masses[i]) + "," +
             w1::io::fmt12(profile.ac_density[i]) + "\n";
    w1::io::write_file(opt.csv_file, csv);
    rep["csv"] = opt.csv_file;
  }
  if (!opt.as_json)
    std::cout << "variation " << w1::io::fmt12(profile.total_variation) << " = atoms "
              << w1::io::fmt12(profile.atom_mass) << " + ac " << w1::io::fmt12(profile.ac_mass)
              << " + residual " << w1::io::fmt12(profile.residual_estimate) << " (delta "
              << w1::io::fmt12(profile.refinement_delta) << ")\n";
  return emit_report(rep, opt.as_json, 0);
}

int cmd_curve_geodesic(const Options& opt) {
  const auto mc = load_curve(opt);
  const bool geo = w1::is_bv_geodesic(mc, opt.tol);
  bool cs = false;
  std::string cs_note;
  try {
    cs = w1::is_constant_speed(mc, opt.tol);
  } catch (const w1::unsupported_error& e) {
    cs_note = e.what();
  }
  json rep;
  rep["is_bv_geodesic"] = geo;
  rep["is_constant_speed"] = cs;
  if (!cs_note.empty()) rep["constant_speed_note"] = cs_note;
  if (!opt.as_json)
    std::cout << "bv-geodesic: " << (geo ? "yes" : "no") << ", constant speed: "
              << (cs ? "yes" : cs_note.empty() ? "no" : "n/a") << "\n";
  return emit_report(rep, opt.as_json, geo ? 0 : 1);
}

int cmd_current_extract(const Options& opt) {
  const auto mc0 = load_curve(opt);
  const auto mc = mc0.has_generator() ? mc0.refined(w1::dyadic_grid(opt.level)) : mc0;
  const auto lift = w1::build_lift(mc, opt.level);
  std::vector<w1::StepVelocity> fields;
  for (std::size_t i = 0; i < mc.steps(); ++i)
    fields.push_back(w1::extract_velocity(lift, mc, i));
  const std::string out = opt.csv_file.empty() ? "velocity.csv" : opt.csv_file;
  w1::io::write_file(out, w1::io::velocity_csv(mc, fields));
  if (!opt.as_json) std::cout << "wrote " << out << " (" << fields.size() << " steps)\n";
  return emit_report(json{{"steps", fields.size()}, {"csv", out}}, opt.as_json, 0);
}

int cmd_current_verify(const Options& opt) {
  const auto mc0 = load_curve(opt);
  const auto mc = mc0.has_generator() ? mc0.refined(w1::dyadic_grid(opt.level)) : mc0;
  const auto lift = w1::build_lift(mc, opt.level);
  double worst_res = 0.0, worst_speed = 0.0;
  for (std::size_t i = 0; i < mc.steps(); ++i) {
    const auto v = w1::extract_velocity(lift, mc, i);
    for (double r : w1::current_residual(mc, v, i)) worst_res = std::max(worst_res, std::abs(r));
    const auto si = w1::speed_identity(mc, v, i);
    worst_speed = std::max(worst_speed, std::abs(si.lhs - si.rhs));
  }
  const bool pass = worst_res <= 1e-9 && worst_speed <= opt.tol;
  json rep;
  rep["max_residual"] = worst_res;
  rep["max_speed_gap"] = worst_speed;
  rep["pass"] = pass;
  if (!opt.as_json)
    std::cout << (pass ? "PASS" : "FAIL") << ": max residual " << w1::io::fmt12(worst_res)
              << ", max |speed lhs - rhs| " << w1::io::fmt12(worst_speed) << "\n";
  return emit_report(rep, opt.as_json, pass ? 0 : 1);
}

int cmd_example_run(const Options& opt) {
  w1::ExampleSpec spec;
  spec.name = opt.example_name;
  for (const auto& kv : opt.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw w1::input_error("--set expects key=value: " + kv);
    spec.params[kv.substr(0, eq)] = kv.substr(eq + 1);
  }
  if (!opt.eps.empty()) spec.params["eps"] = opt.eps;
  if (!opt.y.empty()) spec.params["y"] = opt.y;
  if (!opt.depth.empty()) spec.params["depth"] = opt.depth;
  if (!opt.sigma0.empty()) spec.params["sigma0"] = opt.sigma0;
  if (!opt.grid.empty()) {
    spec.params["K"] = opt.grid;
    spec.params["cells"] = opt.grid;
    spec.params["segments"] = opt.grid;
  }
  if (!opt.example_level.empty()) spec.params["level"] = opt.example_level;

  const auto rep = w1::run_example(spec, opt.out_dir);
  if (!opt.as_json) {
    std::cout << "example " << rep.example << ": " << (rep.all_pass() ? "PASS" : "FAIL") << "\n";
    for (const auto& c : rep.checks)
      std::cout << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name << " (lhs "
                << w1::io::fmt12(c.lhs) << ", rhs " << w1::io::fmt12(c.rhs) << ", tol "
                << w1::io::fmt12(c.tol) << ")\n";
    for (const auto& a : rep.artifacts) std::cout << "  wrote " << a << "\n";
  }
  return emit_report(rep.to_json(), opt.as_json, rep.all_pass() ? 0 : 1);
}

int cmd_suite(const Options& opt) {
  const auto res = w1::suite::run_suite();
  json rep;
  rep["pass"] = res.all_pass();
  json rows = json::array();
  for (const auto& c : res.criteria) {
    rows.push_back({{"id", c.id},
                    {"name", c.name},
                    {"pass", c.pass},
                    {"seconds", c.seconds},
                    {"detail", c.detail}});
    if (!opt.as_json)
      std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << "criterion " << c.id << ": " << c.name
                << " -- " << c.detail << "\n";
  }
  rep["criteria"] = rows;
  if (!opt.out_file.empty()) w1::io::write_file(opt.out_file, rep.dump(2) + "\n");
  if (!opt.as_json)
    std::cout << (res.all_pass() ? "suite PASS" : "suite FAIL") << " (" << res.criteria.size()
              << " criteria)\n";
  return emit_report(rep, opt.as_json, res.all_pass() ? 0 : 1);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"discrete 1-Wasserstein BV-curve toolkit"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* c) {
    c->add_flag("--json", opt.as_json, "print a JSON report to stdout");
  };

  auto* space = app.add_subcommand("space", "metric space utilities")->require_subcommand(1);
  auto* space_validate = space->add_subcommand("validate", "check the metric axioms");
  space_validate->add_option("--in", opt.space_file, "space JSON")->required();
  add_common(space_validate);

  auto* w1cmd = app.add_subcommand("w1", "optimal transport distances")->require_subcommand(1);
  auto* dist = w1cmd->add_subcommand("dist", "W1 distance with dual certificate");
  dist->add_option("--space", opt.space_file)->required();
  dist->add_option("--mu", opt.mu_file)->required();
  dist->add_option("--nu", opt.nu_file)->required();
  dist->add_option("--coupling", opt.coupling_file, "write the optimal coupling here");
  add_common(dist);

  auto* lift = app.add_subcommand("lift", "superposition lifts")->require_subcommand(1);
  auto* lift_build = lift->add_subcommand("build", "build the dyadic lift of a curve");
  lift_build->add_option("--curve", opt.curve_file)->required();
  lift_build->add_option("--level", opt.level, "dyadic level N")->required();
  lift_build->add_option("--out", opt.out_file, "output lift JSON");
  add_common(lift_build);
  auto* lift_verify = lift->add_subcommand("verify", "verify a lift against a curve");
  lift_verify->add_option("--lift", opt.lift_file)->required();
  lift_verify->add_option("--curve", opt.curve_file)->required();
  lift_verify->add_option("--tol", opt.tol);
  add_common(lift_verify);

  auto* curve = app.add_subcommand("curve", "measure-curve diagnostics")->require_subcommand(1);
  auto* curve_var = curve->add_subcommand("var", "W1-variation along the grid");
  curve_var->add_option("--curve", opt.curve_file)->required();
  add_common(curve_var);
  auto* curve_dec = curve->add_subcommand("decompose", "jump/AC/residual split");
  curve_dec->add_option("--curve", opt.curve_file)->required();
  curve_dec->add_option("--levels", opt.levels, "dyadic refinement depth");
  curve_dec->add_option("--csv", opt.csv_file, "write per-cell increments CSV");
  add_common(curve_dec);
  auto* curve_geo = curve->add_subcommand("geodesic", "geodesic classification");
  curve_geo->add_option("--curve", opt.curve_file)->required();
  curve_geo->add_option("--tol", opt.tol);
  add_common(curve_geo);

  auto* current = app.add_subcommand("current", "discrete current equation")->require_subcommand(1);
  auto* cur_ext = current->add_subcommand("extract", "extract velocity fields from the lift");
  cur_ext->add_option("--curve", opt.curve_file)->required();
  cur_ext->add_option("--level", opt.level, "dyadic level N");
  cur_ext->add_option("--csv", opt.csv_file, "velocity CSV path");
  add_common(cur_ext);
  auto* cur_ver = current->add_subcommand("verify", "check residuals and the speed identity");
  cur_ver->add_option("--curve", opt.curve_file)->required();
  cur_ver->add_option("--level", opt.level, "dyadic level N");
  cur_ver->add_option("--tol", opt.tol);
  add_common(cur_ver);

  auto* example = app.add_subcommand("example", "paper example registry")->require_subcommand(1);
  auto* ex_run = example->add_subcommand("run", "run a named example");
  ex_run->add_option("name", opt.example_name, "one of: nonunique_lifts, ac_not_enough, slice2d, cantor_cs, periodic_sigma")
      ->required();
  ex_run->add_option("--out", opt.out_dir, "directory for CSV artifacts");
  ex_run->add_option("--set", opt.sets, "extra key=value parameter")->take_all();
  ex_run->add_option("--eps", opt.eps);
  ex_run->add_option("--y", opt.y);
  ex_run->add_option("--depth", opt.depth);
  ex_run->add_option("--grid", opt.grid, "grid size (K / cells / segments)");
  ex_run->add_option("--sigma0", opt.sigma0, "periodic preset: uniform, delta0, cantor");
  ex_run->add_option("--level", opt.example_level, "dyadic lift level");
  add_common(ex_run);

  auto* suite = app.add_subcommand("suite", "run every acceptance criterion");
  suite->add_option("--out", opt.out_file, "write the JSON summary here");
  add_common(suite);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (space_validate->parsed()) return cmd_space_validate(opt);
    if (dist->parsed()) return cmd_w1_dist(opt);
    if (lift_build->parsed()) return cmd_lift_build(opt);
    if (lift_verify->parsed()) return cmd_lift_verify(opt);
    if (curve_var->parsed()) return cmd_curve_var(opt);
    if (curve_dec->parsed()) return cmd_curve_decompose(opt);
    if (curve_geo->parsed()) return cmd_curve_geodesic(opt);
    if (cur_ext->parsed()) return cmd_current_extract(opt);
    if (cur_ver->parsed()) return cmd_current_verify(opt);
    if (ex_run->parsed()) return cmd_example_run(opt);
    if (suite->parsed()) return cmd_suite(opt);
  } catch (const w1::input_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const w1::unsupported_error& e) {
    std::cerr << "unsupported: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
