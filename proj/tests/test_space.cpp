#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "w1/measure.hpp"
#include "w1/space.hpp"

using namespace w1;

TEST_CASE("validate_metric accepts a 2-point metric") {
  MetricSpace s;
  s.labels = {"a", "b"};
  s.dist = {{0, 1}, {1, 0}};
  REQUIRE(validate_metric(s).empty());
}

TEST_CASE("validate_metric reports a triangle violation with its indices") {
  MetricSpace s;
  s.labels = {"a", "b", "c"};
  s.dist = {{0, 1, 5}, {1, 0, 1}, {5, 1, 0}};
  auto v = validate_metric(s);
  REQUIRE(!v.empty());
  bool found = false;
  for (const auto& viol : v)
    if (viol.axiom == "triangle" && viol.i == 0 && viol.k == 2) found = true;
  REQUIRE(found);
}

TEST_CASE("validate_metric flags structural problems") {
  MetricSpace s;
  s.dist = {{0, 1}, {1}};
  auto v = validate_metric(s);
  REQUIRE(v.size() == 1);
  REQUIRE(v[0].axiom == "square");
}

TEST_CASE("line_space satisfies every axiom (exhaustive triple check)") {
  const auto s = line_space({-2, -1, 1, 2});
  REQUIRE(validate_metric(s).empty());
  const std::size_t n = s.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k)
        REQUIRE(s.d(i, k) <= s.d(i, j) + s.d(j, k) + 1e-15);
}

TEST_CASE("line_space distances and validation errors") {
  const auto s = line_space({0, 1});
  REQUIRE(s.d(0, 1) == 1.0);
  const auto s6 = line_space({-2, -1.5, -1, 1, 1.5, 2});
  REQUIRE(s6.d(0, 5) == 4.0);
  const auto s3 = line_space({0, 1.0 / 3.0, 2.0 / 3.0, 1});
  REQUIRE(s3.d(1, 2) == Catch::Approx(1.0 / 3.0).margin(1e-15));
  REQUIRE_THROWS_AS(line_space({0, 0, 1}), input_error);
  REQUIRE_THROWS_AS(line_space({}), input_error);
}

TEST_CASE("make_space cross-validates coords against dist") {
  std::vector<std::vector<double>> coords{{0.0}, {1.0}};
  std::vector<std::vector<double>> good{{0, 1}, {1, 0}};
  REQUIRE_NOTHROW(make_space({}, coords, good));
  std::vector<std::vector<double>> bad{{0, 2}, {2, 0}};
  REQUIRE_THROWS_AS(make_space({}, coords, bad), input_error);
}

TEST_CASE("first_moment basic values") {
  const auto s = line_space({0, 1});
  REQUIRE(first_moment(s, dirac(s, 0), 0) == 0.0);
  REQUIRE(first_moment(s, uniform_on(s, {0, 1}), 0) == Catch::Approx(0.5));

  const auto s2 = line_space({-2, -1.5, -1, 0});
  const auto mu = uniform_on(s2, {0, 1, 2});
  REQUIRE(first_moment(s2, mu, 3) == Catch::Approx(1.5).margin(1e-12));
}

TEST_CASE("first_moment triangle bound over all base pairs") {
  std::mt19937 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    auto sp = testgen::random_plane_space(rng, 2 + rep % 11);
    auto mu = testgen::random_rational_measure(rng, sp->size());
    for (std::size_t a = 0; a < sp->size(); ++a)
      for (std::size_t b = 0; b < sp->size(); ++b) {
        const double fa = first_moment(*sp, mu, a);
        const double fb = first_moment(*sp, mu, b);
        REQUIRE(std::abs(fa - fb) <= sp->d(a, b) + 1e-12);
      }
  }
}

TEST_CASE("measure construction guards") {
  const auto s = line_space({0, 1, 2});
  REQUIRE_THROWS_AS(make_measure(s, {0.5, 0.5}), input_error);
  REQUIRE_THROWS_AS(make_measure(s, {0.7, 0.2, 0.2}), input_error);
  REQUIRE_THROWS_AS(make_measure(s, {1.2, -0.2, 0.0}), input_error);
  REQUIRE_NOTHROW(make_measure(s, {0.25, 0.5, 0.25}));
}
