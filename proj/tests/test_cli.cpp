#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "w1/generators.hpp"
#include "w1/io.hpp"

// End-to-end checks of the CLI binary: exit codes, JSON determinism, file
// outputs.  The binary path comes from the build system.

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  const std::string out_file = "cli_stdout.tmp";
  const std::string cmd = std::string(W1CLI_PATH) + " " + args + " > " + out_file + " 2>&1";
  const int rc = std::system(cmd.c_str());
  RunResult r;
  r.code = WEXITSTATUS(rc);
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  std::remove(out_file.c_str());
  return r;
}

void write(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("space validate: exit 0 on valid, 1 on violations, 2 on bad input") {
  write("space_ok.json", R"({"labels":["a","b"],"coords":[[0],[1]],"dist":null})");
  REQUIRE(run_cli("space validate --in space_ok.json").code == 0);

  write("space_bad.json", R"({"dist":[[0,1,5],[1,0,1],[5,1,0]]})");
  const auto bad = run_cli("space validate --in space_bad.json");
  REQUIRE(bad.code == 1);
  REQUIRE(bad.out.find("triangle") != std::string::npos);

  write("space_broken.json", R"({"labels":[)");
  REQUIRE(run_cli("space validate --in space_broken.json").code == 2);
  REQUIRE(run_cli("space validate --in missing.json").code == 2);
}

TEST_CASE("w1 dist runs and writes a coupling") {
  write("sp.json", R"({"coords":[[0],[1]]})");
  write("mu.json", R"({"weights":[1,0]})");
  write("nu.json", R"({"weights":[0,1]})");
  const auto r = run_cli("w1 dist --space sp.json --mu mu.json --nu nu.json --coupling c.json --json");
  REQUIRE(r.code == 0);
  const auto j = w1::io::json::parse(r.out);
  REQUIRE(j["distance"].get<double>() == Catch::Approx(1.0));
  REQUIRE(j["duality_gap"].get<double>() <= 1e-9);
  std::ifstream c("c.json");
  REQUIRE(c.good());
}

TEST_CASE("lift build then verify round trips through files") {
  const auto curve = w1::io::measure_curve_to_json(w1::gen_cantor(6, w1::dyadic_grid(4)));
  write("curve.json", curve.dump(2));
  REQUIRE(run_cli("lift build --curve curve.json --level 4 --out lift_out.json").code == 0);
  const auto v = run_cli("lift verify --lift lift_out.json --curve curve.json --json");
  REQUIRE(v.code == 0);
  const auto j = w1::io::json::parse(v.out);
  REQUIRE(j["marginal_error"].get<double>() <= 1e-9);
  REQUIRE(j["variation_identity_gap"].get<double>() <= 1e-8);
}

TEST_CASE("curve subcommands: var, decompose, geodesic") {
  const auto curve = w1::io::measure_curve_to_json(w1::gen_cantor(8, w1::dyadic_grid(6)));
  write("cantor.json", curve.dump(2));
  const auto var = run_cli("curve var --curve cantor.json --json");
  REQUIRE(var.code == 0);
  REQUIRE(w1::io::json::parse(var.out)["variation"].get<double>() == Catch::Approx(1.0).margin(1e-9));

  const auto dec = run_cli("curve decompose --curve cantor.json --levels 8 --csv dec.csv --json");
  REQUIRE(dec.code == 0);
  std::ifstream csv("dec.csv");
  std::string header;
  std::getline(csv, header);
  REQUIRE(header == "t_lo,t_hi,w1_increment,density");

  REQUIRE(run_cli("curve geodesic --curve cantor.json").code == 0);
}

TEST_CASE("current verify passes on the linear curve") {
  w1::io::json j;
  j["space"] = w1::io::json{{"coords", {{0.0}, {1.0}}}};
  j["generator"] = {{"name", "linear"}, {"payload", {{1.0, 0.0}, {0.0, 1.0}}}};
  j["grid"] = w1::dyadic_grid(3);
  write("lin.json", j.dump(2));
  const auto r = run_cli("current verify --curve lin.json --level 3 --json");
  REQUIRE(r.code == 0);
  const auto rep = w1::io::json::parse(r.out);
  REQUIRE(rep["max_residual"].get<double>() <= 1e-9);
  REQUIRE(rep["pass"].get<bool>());
  REQUIRE(run_cli("current extract --curve lin.json --level 3 --csv vel.csv").code == 0);
  std::ifstream csv("vel.csv");
  std::string header;
  std::getline(csv, header);
  REQUIRE(header == "t,x,y,v,contribution");
}

TEST_CASE("example run is deterministic byte for byte") {
  const auto a = run_cli("example run slice2d --json");
  const auto b = run_cli("example run slice2d --json");
  REQUIRE(a.code == 0);
  REQUIRE(a.out == b.out);
  const auto j = w1::io::json::parse(a.out);
  REQUIRE(j["pass"].get<bool>());
}

TEST_CASE("example run rejects unknown names with exit 2") {
  REQUIRE(run_cli("example run nope").code == 2);
  REQUIRE(run_cli("example run slice2d --eps 0.9").code == 2);
}

TEST_CASE("wrong JSON types are input errors") {
  write("sp2.json", R"({"coords":[[0],[1]]})");
  write("mu_bad.json", R"({"weights":"not-an-array"})");
  write("nu2.json", R"({"weights":[0,1]})");
  REQUIRE(run_cli("w1 dist --space sp2.json --mu mu_bad.json --nu nu2.json").code == 2);
}
