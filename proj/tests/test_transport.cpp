#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "w1/gluing.hpp"
#include "w1/line_oracle.hpp"
#include "w1/transport.hpp"

using namespace w1;

namespace {
std::shared_ptr<const MetricSpace> nonunique_space() {
  return std::make_shared<const MetricSpace>(line_space({-2, -1.5, -1, 1, 1.5, 2}));
}
}  // namespace

TEST_CASE("line oracle closed forms") {
  const auto s = line_space({0, 1});
  REQUIRE(w1_line_oracle(s, dirac(s, 0), dirac(s, 1)) == 1.0);
  REQUIRE(w1_line_oracle(s, dirac(s, 0), dirac(s, 0)) == 0.0);
  const auto s3 = line_space({0, 0.5, 1});
  REQUIRE(w1_line_oracle(s3, uniform_on(s3, {0, 1}), uniform_on(s3, {1, 2})) ==
          Catch::Approx(0.5));
}

TEST_CASE("w1 trivial and dirac cases") {
  const auto s = line_space({0, 1});
  const auto same = solve_w1(s, uniform_on(s, {0, 1}), uniform_on(s, {0, 1}));
  REQUIRE(same.distance == 0.0);
  for (const auto& e : same.coupling.entries) REQUIRE(e.i == e.j);

  const auto r = solve_w1(s, dirac(s, 0), dirac(s, 1));
  REQUIRE(r.distance == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(r.cert.reported_gap <= 1e-9);
}

TEST_CASE("w1 on the separated uniform instance equals 3") {
  const auto sp = nonunique_space();
  const auto mu = uniform_on(*sp, {0, 1, 2});
  const auto nu = uniform_on(*sp, {3, 4, 5});
  const auto r = solve_w1(*sp, mu, nu);
  REQUIRE(r.distance == Catch::Approx(3.0).margin(1e-9));
  REQUIRE(r.distance == Catch::Approx(w1_line_oracle(*sp, mu, nu)).margin(1e-9));
  check_coupling_feasible(*sp, r.coupling, mu, nu);
}

TEST_CASE("solver matches the CDF oracle on random line instances") {
  std::mt19937 rng(101);
  std::uniform_int_distribution<std::size_t> size(2, 30);
  for (int rep = 0; rep < 100; ++rep) {
    auto sp = testgen::random_line_space(rng, size(rng));
    auto mu = testgen::random_rational_measure(rng, sp->size());
    auto nu = testgen::random_rational_measure(rng, sp->size());
    const auto r = solve_w1(*sp, mu, nu);
    REQUIRE(r.distance == Catch::Approx(w1_line_oracle(*sp, mu, nu)).margin(1e-8));
    REQUIRE(r.cert.reported_gap <= 1e-9);
    check_coupling_feasible(*sp, r.coupling, mu, nu);
    REQUIRE(std::abs(r.coupling.cost(*sp) - r.distance) <= 1e-12);
  }
}

TEST_CASE("dual certificate is 1-Lipschitz and tight") {
  std::mt19937 rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    auto sp = testgen::random_plane_space(rng, 2 + rep % 9);
    auto mu = testgen::random_rational_measure(rng, sp->size());
    auto nu = testgen::random_rational_measure(rng, sp->size());
    const auto r = solve_w1(*sp, mu, nu);
    REQUIRE(r.cert.reported_gap <= 1e-9);
    for (std::size_t x = 0; x < sp->size(); ++x)
      for (std::size_t y = 0; y < sp->size(); ++y)
        REQUIRE(std::abs(r.cert.potential[x] - r.cert.potential[y]) <= sp->d(x, y) + 1e-9);
  }
}

TEST_CASE("W1 satisfies the triangle inequality on random triples") {
  std::mt19937 rng(23);
  for (int rep = 0; rep < 30; ++rep) {
    auto sp = testgen::random_plane_space(rng, 3 + rep % 7);
    auto a = testgen::random_rational_measure(rng, sp->size());
    auto b = testgen::random_rational_measure(rng, sp->size());
    auto c = testgen::random_rational_measure(rng, sp->size());
    const double ab = solve_w1(*sp, a, b).distance;
    const double bc = solve_w1(*sp, b, c).distance;
    const double ac = solve_w1(*sp, a, c).distance;
    REQUIRE(ac <= ab + bc + 1e-8);
  }
}

TEST_CASE("the solver is deterministic") {
  std::mt19937 rng(55);
  auto sp = testgen::random_line_space(rng, 12);
  auto mu = testgen::random_rational_measure(rng, 12);
  auto nu = testgen::random_rational_measure(rng, 12);
  const auto r1 = solve_w1(*sp, mu, nu);
  const auto r2 = solve_w1(*sp, mu, nu);
  REQUIRE(r1.distance == r2.distance);
  REQUIRE(r1.coupling.entries.size() == r2.coupling.entries.size());
  for (std::size_t k = 0; k < r1.coupling.entries.size(); ++k) {
    REQUIRE(r1.coupling.entries[k].i == r2.coupling.entries[k].i);
    REQUIRE(r1.coupling.entries[k].j == r2.coupling.entries[k].j);
    REQUIRE(r1.coupling.entries[k].mass == r2.coupling.entries[k].mass);
  }
}

TEST_CASE("discrete metric: W1 equals the total-variation distance") {
  // with d(x,y) = 1 off the diagonal, the transport cost is half the L1 gap
  std::mt19937 rng(83);
  const std::size_t n = 7;
  std::vector<std::vector<double>> dist(n, std::vector<double>(n, 1.0));
  for (std::size_t i = 0; i < n; ++i) dist[i][i] = 0.0;
  const auto sp = make_space({}, std::nullopt, dist);
  for (int rep = 0; rep < 40; ++rep) {
    const auto mu = testgen::random_rational_measure(rng, n);
    const auto nu = testgen::random_rational_measure(rng, n);
    double l1 = 0.0;
    for (std::size_t x = 0; x < n; ++x) l1 += std::abs(mu(x) - nu(x));
    const auto r = solve_w1(sp, mu, nu);
    REQUIRE(r.distance == Catch::Approx(l1 / 2.0).margin(1e-9));
    REQUIRE(r.cert.reported_gap <= 1e-9);
  }
}

TEST_CASE("monotone coupling is optimal on random line instances") {
  std::mt19937 rng(67);
  std::uniform_int_distribution<std::size_t> size(2, 20);
  for (int rep = 0; rep < 60; ++rep) {
    auto sp = testgen::random_line_space(rng, size(rng));
    auto mu = testgen::random_rational_measure(rng, sp->size());
    auto nu = testgen::random_rational_measure(rng, sp->size());
    const auto mono = monotone_coupling(*sp, mu, nu);
    check_coupling_feasible(*sp, mono, mu, nu);
    REQUIRE(mono.cost(*sp) == Catch::Approx(solve_w1(*sp, mu, nu).distance).margin(1e-9));
  }
  const auto plane = testgen::random_plane_space(rng, 4);
  REQUIRE_THROWS_AS(
      monotone_coupling(*plane, uniform_on(*plane, {0, 1}), uniform_on(*plane, {2, 3})),
      unsupported_error);
}

TEST_CASE("w1 rejects mismatched inputs") {
  const auto s = line_space({0, 1});
  DiscreteMeasure bad{{0.6, 0.6}};
  REQUIRE_THROWS_AS(solve_w1(s, bad, dirac(s, 0)), input_error);
}

TEST_CASE("is_optimal on solver output, diagonal and the product coupling") {
  const auto sp = nonunique_space();
  const auto mu = uniform_on(*sp, {0, 1, 2});
  const auto nu = uniform_on(*sp, {3, 4, 5});
  REQUIRE(is_optimal(*sp, solve_w1(*sp, mu, nu).coupling, 1e-9));

  Coupling diag;
  diag.n = sp->size();
  for (std::size_t x = 0; x < 3; ++x) diag.entries.push_back({x, x, 1.0 / 3.0});
  REQUIRE(is_optimal(*sp, diag, 1e-9));

  // On the separated instance every coupling is optimal, the product one too.
  Coupling prod;
  prod.n = sp->size();
  for (std::size_t x = 0; x < 3; ++x)
    for (std::size_t y = 3; y < 6; ++y) prod.entries.push_back({x, y, 1.0 / 9.0});
  REQUIRE(is_optimal(*sp, prod, 1e-9));

  // A genuinely suboptimal coupling on a 3-point instance is rejected.
  const auto s3 = line_space({0, 1, 2});
  Coupling bad;
  bad.n = 3;
  bad.entries = {{0, 2, 0.5}, {1, 1, 0.0}, {2, 0, 0.5}};
  REQUIRE(!is_optimal(s3, bad, 1e-9));
}

TEST_CASE("glue forced by marginals") {
  const auto s = line_space({0, 1, 2});
  Coupling c12;
  c12.n = 3;
  c12.entries = {{0, 0, 1.0}};
  Coupling c23;
  c23.n = 3;
  c23.entries = {{0, 1, 0.5}, {0, 2, 0.5}};
  const auto g = glue(c12, c23);
  REQUIRE(g.atoms.size() == 2);
  for (const auto& a : g.atoms) {
    REQUIRE(a.path[0] == 0);
    REQUIRE(a.path[1] == 0);
    REQUIRE(a.mass == Catch::Approx(0.5));
  }
}

TEST_CASE("glue of diagonal couplings is diagonal") {
  const auto s = line_space({0, 1});
  Coupling d;
  d.n = 2;
  d.entries = {{0, 0, 0.5}, {1, 1, 0.5}};
  const auto g = glue(d, d);
  REQUIRE(g.atoms.size() == 2);
  for (const auto& a : g.atoms) {
    REQUIRE(a.path[0] == a.path[1]);
    REQUIRE(a.path[1] == a.path[2]);
  }
}

TEST_CASE("glue projections reproduce the inputs (brute force)") {
  std::mt19937 rng(31);
  const auto sp = testgen::random_line_space(rng, 4);
  DiscreteMeasure a{{0.3, 0.2, 0.25, 0.25}};
  DiscreteMeasure b{{0.1, 0.4, 0.15, 0.35}};
  DiscreteMeasure c{{0.25, 0.25, 0.25, 0.25}};
  const auto c12 = testgen::random_feasible_coupling(rng, *sp, a, b);
  const auto c23 = testgen::random_feasible_coupling(rng, *sp, b, c);
  const auto g = glue(c12, c23);
  const auto p12 = g.pair_projection(0);
  const auto p23 = g.pair_projection(1);
  auto match = [](const Coupling& lhs, const Coupling& rhs) {
    std::map<std::pair<std::size_t, std::size_t>, double> l, r;
    for (const auto& e : lhs.entries) l[{e.i, e.j}] += e.mass;
    for (const auto& e : rhs.entries) r[{e.i, e.j}] += e.mass;
    for (const auto& [k, m] : l)
      if (std::abs(m - r[k]) > 1e-9) return false;
    for (const auto& [k, m] : r)
      if (std::abs(m - l[k]) > 1e-9) return false;
    return true;
  };
  REQUIRE(match(p12, c12));
  REQUIRE(match(p23, c23));
}

TEST_CASE("glue rejects mismatched interfaces") {
  Coupling c12;
  c12.n = 2;
  c12.entries = {{0, 0, 1.0}};
  Coupling c23;
  c23.n = 2;
  c23.entries = {{1, 1, 1.0}};
  REQUIRE_THROWS_AS(glue(c12, c23), input_error);
}

TEST_CASE("glue_chain keeps all prescribed marginal identities (4-step chain)") {
  std::mt19937 rng(47);
  const auto sp = testgen::random_line_space(rng, 3);
  std::vector<DiscreteMeasure> ms;
  for (int i = 0; i < 5; ++i) ms.push_back(testgen::random_rational_measure(rng, 3));
  std::vector<Coupling> chain;
  for (int i = 0; i < 4; ++i) chain.push_back(solve_w1(*sp, ms[i], ms[i + 1]).coupling);
  const auto plan = glue_chain(chain);
  REQUIRE(plan.marginals == 5);
  REQUIRE(plan.total_mass() == Catch::Approx(1.0).margin(1e-9));
  for (std::size_t k = 0; k < 5; ++k) {
    const auto marg = plan.marginal(k);
    for (std::size_t x = 0; x < 3; ++x) REQUIRE(marg[x] == Catch::Approx(ms[k](x)).margin(1e-9));
  }
  // chain of two couplings equals glue of the pair
  const auto two = glue_chain({chain[0], chain[1]});
  const auto direct = glue(chain[0], chain[1]);
  REQUIRE(two.atoms.size() == direct.atoms.size());
}

TEST_CASE("identity chain gives the diagonal plan") {
  const auto s = line_space({0, 1, 2});
  const auto mu = uniform_on(s, {0, 1, 2});
  Coupling id;
  id.n = 3;
  for (std::size_t x = 0; x < 3; ++x) id.entries.push_back({x, x, mu(x)});
  const auto plan = glue_chain({id, id, id});
  for (const auto& a : plan.atoms)
    for (std::size_t k = 1; k < a.path.size(); ++k) REQUIRE(a.path[k] == a.path[0]);
}
