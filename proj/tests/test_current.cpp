#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "w1/current.hpp"
#include "w1/generators.hpp"
#include "w1/lift.hpp"

using namespace w1;

namespace {
MeasureCurve linear01(int level) {
  auto sp = std::make_shared<const MetricSpace>(line_space({0.0, 1.0}));
  return gen_linear(sp, dirac(*sp, 0), dirac(*sp, 1), dyadic_grid(level));
}

// Velocity field read off an explicit coupling for one step.
StepVelocity field_from_coupling(const MeasureCurve& mc, const Coupling& c, std::size_t step) {
  StepVelocity v;
  v.t0 = mc.grid[step];
  v.t1 = mc.grid[step + 1];
  for (const auto& e : c.entries) {
    if (e.i == e.j) continue;
    const double m = mc.measures[step](e.i);
    if (m > 0.0) v.rate[{e.i, e.j}] += e.mass / (v.h() * m);
  }
  return v;
}
}  // namespace

TEST_CASE("constant curve extracts the zero field") {
  auto sp = std::make_shared<const MetricSpace>(line_space({0.0, 1.0}));
  const auto mc = gen_linear(sp, dirac(*sp, 0), dirac(*sp, 0), dyadic_grid(3));
  const auto lift = build_lift(mc, 3);
  for (std::size_t i = 0; i < mc.steps(); ++i) {
    const auto v = extract_velocity(lift, mc, i);
    REQUIRE(v.rate.empty());
    for (double r : current_residual(mc, v, i)) REQUIRE(r == 0.0);
    const auto si = speed_identity(mc, v, i);
    REQUIRE(si.lhs == 0.0);
    REQUIRE(si.rhs == 0.0);
  }
}

TEST_CASE("linear dirac curve: v^0(1) = 1/(1 - t_i)") {
  const int N = 4;
  const auto mc = linear01(N);
  const auto lift = build_lift(mc, N);
  for (std::size_t i = 0; i < mc.steps(); ++i) {
    const auto v = extract_velocity(lift, mc, i);
    const double expected = 1.0 / (1.0 - mc.grid[i]);
    REQUIRE(v.at(0, 1) == Catch::Approx(expected).margin(1e-9));
    REQUIRE(v.at(1, 0) == 0.0);
  }
}

TEST_CASE("extracted fields satisfy the current equation to 1e-9") {
  const auto mc = linear01(5);
  const auto lift = build_lift(mc, 5);
  for (std::size_t i = 0; i < mc.steps(); ++i) {
    const auto v = extract_velocity(lift, mc, i);
    for (double r : current_residual(mc, v, i)) REQUIRE(std::abs(r) <= 1e-9);
  }
}

TEST_CASE("residual conservation: residuals sum to zero for any feasible field") {
  std::mt19937 rng(17);
  for (int rep = 0; rep < 25; ++rep) {
    auto sp = testgen::random_plane_space(rng, 2 + rep % 7);
    auto mu = testgen::random_rational_measure(rng, sp->size());
    auto nu = testgen::random_rational_measure(rng, sp->size());
    const auto mc = gen_linear(sp, mu, nu, dyadic_grid(1));
    const auto c = testgen::random_feasible_coupling(rng, *sp, mc.measures[0], mc.measures[1]);
    const auto v = field_from_coupling(mc, c, 0);
    double sum = 0.0;
    for (double r : current_residual(mc, v, 0)) sum += r;
    REQUIRE(std::abs(sum) <= 1e-12);
  }
}

TEST_CASE("perturbing one rate breaks the balance at exactly two points") {
  const auto mc = linear01(3);
  const auto lift = build_lift(mc, 3);
  auto v = extract_velocity(lift, mc, 2);
  v.rate[{0, 1}] += 1.0;
  const auto res = current_residual(mc, v, 2);
  const double m = mc.measures[2](0);
  REQUIRE(res[0] == Catch::Approx(m).margin(1e-9));
  REQUIRE(res[1] == Catch::Approx(-m).margin(1e-9));
}

TEST_CASE("speed identity: equality for optimal fields, defect for shuffled ones") {
  const auto mc = linear01(4);
  const auto lift = build_lift(mc, 4);
  for (std::size_t i = 0; i < mc.steps(); ++i) {
    const auto si = speed_identity(mc, extract_velocity(lift, mc, i), i);
    REQUIRE(si.lhs == Catch::Approx(1.0).margin(1e-8));
    REQUIRE(si.rhs == Catch::Approx(1.0).margin(1e-8));
  }

  // a 3-point instance with a unique optimum: anti-monotone is strictly worse
  auto sp = std::make_shared<const MetricSpace>(line_space({0.0, 1.0, 2.0, 3.0, 4.0, 5.0}));
  const auto mu0 = uniform_on(*sp, {0, 1, 2});
  const auto mu1 = uniform_on(*sp, {1, 2, 3});
  const auto mc3 = gen_linear(sp, mu0, mu1, dyadic_grid(2));
  const auto bad = shuffled_coupling(*sp, mc3.measures[1], mc3.measures[2]);
  const auto v = field_from_coupling(mc3, bad, 1);
  const auto si = speed_identity(mc3, v, 1);
  REQUIRE(si.lhs < si.rhs - 1e-3);
}

TEST_CASE("a priori bound lhs <= rhs on random feasible fields") {
  std::mt19937 rng(2026);
  for (int rep = 0; rep < 50; ++rep) {
    auto sp = testgen::random_plane_space(rng, 2 + rep % 7);
    auto mu = testgen::random_rational_measure(rng, sp->size());
    auto nu = testgen::random_rational_measure(rng, sp->size());
    const auto mc = gen_linear(sp, mu, nu, dyadic_grid(1));
    const auto c = testgen::random_feasible_coupling(rng, *sp, mc.measures[0], mc.measures[1]);
    const auto v = field_from_coupling(mc, c, 0);
    const auto si = speed_identity(mc, v, 0);
    REQUIRE(si.lhs <= si.rhs + 1e-8);
  }
}

TEST_CASE("extracted rates are nonnegative and live on the step coupling support") {
  const auto mc = gen_slice2d(0.25, 0.6, 16, slice2d_default_grid(0.6)).refined(dyadic_grid(4));
  const auto lift = build_lift(mc, 4);
  // the only moving cell is the one containing y = 3/5; transport goes from
  // the left strip to the right strip ("only transport horizontally")
  for (std::size_t i = 0; i < mc.steps(); ++i) {
    const auto v = extract_velocity(lift, mc, i);
    const bool jump_cell = mc.grid[i] < 0.6 && 0.6 <= mc.grid[i + 1];
    if (!jump_cell) {
      REQUIRE(v.rate.empty());
      continue;
    }
    REQUIRE(!v.rate.empty());
    for (const auto& [key, rate] : v.rate) {
      REQUIRE(rate >= 0.0);
      const double from = mc.space().coord1d(key.first);
      const double to = mc.space().coord1d(key.second);
      REQUIRE(from < 0.25);        // left strip
      REQUIRE(to > 0.75);          // right strip
    }
  }
}

TEST_CASE("extract_velocity refuses mismatched marginals") {
  const auto mc = linear01(3);
  auto lift = build_lift(mc, 3);
  lift.atoms.pop_back();
  double total = lift.total_weight();
  for (auto& a : lift.atoms) a.weight /= total;
  REQUIRE_THROWS_AS(extract_velocity(lift, mc, 0), input_error);
}

TEST_CASE("benamou-brenier comparison over candidate fields") {
  auto sp = std::make_shared<const MetricSpace>(line_space({0.0, 1.0, 3.0}));
  const auto mu0 = dirac(*sp, 0);
  const auto mu1 = dirac(*sp, 1);
  const int N = 3;

  BenamouBrenierCandidate direct;
  direct.name = "optimal-lift";
  direct.curve = gen_linear(sp, mu0, mu1, dyadic_grid(N));
  const auto lift = build_lift(direct.curve, N);
  for (std::size_t i = 0; i < direct.curve.steps(); ++i)
    direct.fields.push_back(extract_velocity(lift, direct.curve, i));

  // detour through the far point at coordinate 3
  BenamouBrenierCandidate detour;
  detour.name = "detour";
  detour.curve = gen_piecewise_linear(sp, {0.0, 0.5, 1.0}, {mu0, dirac(*sp, 2), mu1},
                                      dyadic_grid(N));
  const auto dlift = build_lift(detour.curve, N);
  for (std::size_t i = 0; i < detour.curve.steps(); ++i)
    detour.fields.push_back(extract_velocity(dlift, detour.curve, i));

  // adversarial candidate: same curve, anti-monotone couplings per step
  BenamouBrenierCandidate adv;
  adv.name = "shuffled";
  adv.curve = direct.curve;
  for (std::size_t i = 0; i < adv.curve.steps(); ++i) {
    const auto bad =
        shuffled_coupling(*sp, adv.curve.measures[i], adv.curve.measures[i + 1]);
    adv.fields.push_back(field_from_coupling(adv.curve, bad, i));
  }

  const auto rep = benamou_brenier_compare(*sp, mu0, mu1, {direct, detour, adv});
  REQUIRE(rep.w1_distance == Catch::Approx(1.0));
  for (const auto& row : rep.rows) REQUIRE(row.accepted);
  REQUIRE(rep.rows[0].action == Catch::Approx(1.0).margin(1e-8));
  REQUIRE(rep.rows[1].action == Catch::Approx(5.0).margin(1e-8));  // 3 out, 2 back
  REQUIRE(rep.rows[2].action > 1.0 + 1e-3);
  REQUIRE(rep.lower_bound_ok);
  REQUIRE(rep.attained);
}

TEST_CASE("benamou-brenier: trivial candidate for mu0 = mu1 costs zero") {
  auto sp = std::make_shared<const MetricSpace>(line_space({0.0, 1.0}));
  const auto mu = uniform_on(*sp, {0, 1});
  BenamouBrenierCandidate cand;
  cand.name = "constant";
  cand.curve = gen_linear(sp, mu, mu, dyadic_grid(2));
  const auto lift = build_lift(cand.curve, 2);
  for (std::size_t i = 0; i < cand.curve.steps(); ++i)
    cand.fields.push_back(extract_velocity(lift, cand.curve, i));
  const auto rep = benamou_brenier_compare(*sp, mu, mu, {cand});
  REQUIRE(rep.w1_distance == 0.0);
  REQUIRE(rep.rows[0].accepted);
  REQUIRE(rep.rows[0].action == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(rep.attained);
}

TEST_CASE("benamou-brenier rejects candidates violating the current equation") {
  auto sp = std::make_shared<const MetricSpace>(line_space({0.0, 1.0}));
  const auto mu0 = dirac(*sp, 0), mu1 = dirac(*sp, 1);
  BenamouBrenierCandidate cand;
  cand.name = "broken";
  cand.curve = gen_linear(sp, mu0, mu1, dyadic_grid(2));
  const auto lift = build_lift(cand.curve, 2);
  for (std::size_t i = 0; i < cand.curve.steps(); ++i)
    cand.fields.push_back(extract_velocity(lift, cand.curve, i));
  cand.fields[1].rate[{1, 0}] += 0.5;  // breaks the balance at two points
  const auto rep = benamou_brenier_compare(*sp, mu0, mu1, {cand});
  REQUIRE(!rep.rows[0].accepted);
  REQUIRE(rep.rows[0].reject_reason.find("residual") != std::string::npos);
}

TEST_CASE("off-edge diagnostic flags non-graph transport") {
  const auto mc = linear01(2);
  const auto lift = build_lift(mc, 2);
  const auto v = extract_velocity(lift, mc, 0);
  std::set<std::pair<std::size_t, std::size_t>> edges{{0, 1}};
  REQUIRE(off_edge_rate(mc, v, 0, edges) == 0.0);
  std::set<std::pair<std::size_t, std::size_t>> none;
  REQUIRE(off_edge_rate(mc, v, 0, none) > 0.0);
}
