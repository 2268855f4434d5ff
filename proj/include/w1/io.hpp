#pragma once

#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "w1/common.hpp"
#include "w1/current.hpp"
#include "w1/generators.hpp"
#include "w1/lift.hpp"
#include "w1/measure.hpp"
#include "w1/measure_curve.hpp"
#include "w1/space.hpp"
#include "w1/step_curve.hpp"
#include "w1/transport.hpp"

namespace w1::io {

// Ordered keys keep reports byte-identical across runs.
using json = nlohmann::ordered_json;

// CSV floats are printed with 12 significant digits.
inline std::string fmt12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline json space_to_json(const MetricSpace& s) {
  json j;
  j["labels"] = s.labels;
  if (s.coords)
    j["coords"] = *s.coords;
  else
    j["coords"] = nullptr;
  j["dist"] = s.dist;
  return j;
}

// Descriptor rule: at least one of coords/dist; when both are present their
// consistency is part of validation.
inline MetricSpace space_from_json(const json& j) {
  std::vector<std::string> labels;
  if (j.contains("labels") && !j["labels"].is_null())
    labels = j["labels"].get<std::vector<std::string>>();
  std::optional<std::vector<std::vector<double>>> coords, dist;
  if (j.contains("coords") && !j["coords"].is_null())
    coords = j["coords"].get<std::vector<std::vector<double>>>();
  if (j.contains("dist") && !j["dist"].is_null())
    dist = j["dist"].get<std::vector<std::vector<double>>>();
  if (!coords && !dist) throw input_error("space descriptor: need coords or dist");
  return make_space(std::move(labels), std::move(coords), std::move(dist));
}

inline json measure_to_json(const DiscreteMeasure& mu) { return json{{"weights", mu.weights}}; }

inline DiscreteMeasure measure_from_json(const MetricSpace& space, const json& j) {
  std::vector<double> w;
  if (j.is_array())
    w = j.get<std::vector<double>>();
  else if (j.contains("weights"))
    w = j["weights"].get<std::vector<double>>();
  else
    throw input_error("measure descriptor: expected weights");
  return make_measure(space, std::move(w));
}

inline json coupling_to_json(const Coupling& c) {
  json arr = json::array();
  for (const auto& e : c.entries) arr.push_back({{"i", e.i}, {"j", e.j}, {"m", e.mass}});
  return arr;
}

inline json curve_to_json(const StepCurve& c) {
  json j;
  j["jumps"] = c.jump_times;
  j["values"] = c.values;
  j["lc1"] = c.left_continuous_at_1;
  return j;
}

inline StepCurve curve_from_json(std::size_t space_size, const json& j) {
  auto c = make_step_curve(space_size, j.at("jumps").get<std::vector<double>>(),
                           j.at("values").get<std::vector<std::size_t>>());
  if (j.contains("lc1") && j["lc1"].get<bool>() != c.left_continuous_at_1)
    throw input_error("curve descriptor: lc1 flag inconsistent with jump times");
  return c;
}

inline json generator_to_json(const GeneratorSpec& g) {
  json j;
  j["name"] = g.name;
  for (const auto& [k, v] : g.scalars) j[k] = v;
  if (!g.payload.empty()) j["payload"] = g.payload;
  return j;
}

inline GeneratorSpec generator_from_json(const json& j) {
  GeneratorSpec g;
  g.name = j.at("name").get<std::string>();
  for (const auto& [k, v] : j.items()) {
    if (k == "name" || k == "payload") continue;
    g.scalars[k] = v.get<double>();
  }
  if (j.contains("payload")) g.payload = j["payload"].get<std::vector<std::vector<double>>>();
  return g;
}

// Rebuilds a generator-backed curve from its spec.  The grid argument
// overrides the descriptor's grid when non-empty.
inline MeasureCurve curve_from_generator_spec(const GeneratorSpec& g, std::vector<double> grid,
                                              std::shared_ptr<const MetricSpace> space = nullptr) {
  auto scalar = [&](const std::string& key, double fallback) {
    auto it = g.scalars.find(key);
    return it == g.scalars.end() ? fallback : it->second;
  };
  if (g.name == "linear") {
    if (!space) throw input_error("generator linear: needs a space descriptor");
    if (g.payload.size() != 2) throw input_error("generator linear: payload must hold mu0, mu1");
    return gen_linear(space, make_measure(*space, g.payload[0]), make_measure(*space, g.payload[1]),
                      std::move(grid));
  }
  if (g.name == "piecewise_linear") {
    if (!space) throw input_error("generator piecewise_linear: needs a space descriptor");
    if (g.payload.size() < 3)
      throw input_error("generator piecewise_linear: payload must hold times plus measures");
    std::vector<DiscreteMeasure> ms;
    for (std::size_t k = 1; k < g.payload.size(); ++k)
      ms.push_back(make_measure(*space, g.payload[k]));
    return gen_piecewise_linear(space, g.payload[0], std::move(ms), std::move(grid));
  }
  if (g.name == "cantor")
    return gen_cantor(static_cast<int>(scalar("depth", 8)),
                      grid.empty() ? dyadic_grid(8) : std::move(grid));
  if (g.name == "slice2d") {
    const double y = scalar("y", 0.6);
    return gen_slice2d(scalar("eps", 0.25), y,
                       static_cast<std::size_t>(scalar("cells", 16)),
                       grid.empty() ? slice2d_default_grid(y) : std::move(grid));
  }
  if (g.name == "periodic_sigma") {
    if (g.payload.size() != 1)
      throw input_error("generator periodic_sigma: payload must hold sigma0");
    const std::size_t K = g.payload[0].size();
    return gen_periodic_sigma(g.payload[0], grid.empty() ? periodic_grid(K) : std::move(grid))
        .curve;
  }
  throw input_error("unknown generator: " + g.name);
}

inline json measure_curve_to_json(const MeasureCurve& mc) {
  json j;
  j["space"] = space_to_json(mc.space());
  j["grid"] = mc.grid;
  if (mc.generator) {
    j["generator"] = generator_to_json(*mc.generator);
  } else {
    json ms = json::array();
    for (const auto& m : mc.measures) ms.push_back(m.weights);
    j["measures"] = ms;
  }
  return j;
}

inline MeasureCurve measure_curve_from_json(const json& j) {
  std::shared_ptr<const MetricSpace> space;
  if (j.contains("space"))
    space = std::make_shared<const MetricSpace>(space_from_json(j["space"]));
  std::vector<double> grid;
  if (j.contains("grid")) grid = j["grid"].get<std::vector<double>>();
  if (j.contains("generator"))
    return curve_from_generator_spec(generator_from_json(j["generator"]), std::move(grid), space);
  if (!space) throw input_error("curve descriptor: needs a space");
  if (!j.contains("measures")) throw input_error("curve descriptor: needs measures or generator");
  std::vector<DiscreteMeasure> ms;
  for (const auto& row : j["measures"]) ms.push_back(make_measure(*space, row.get<std::vector<double>>()));
  return make_measure_curve(std::move(space), std::move(grid), std::move(ms));
}

inline json lift_to_json(const Lift& lift) {
  json j;
  j["space"] = space_to_json(lift.space());
  j["grid"] = lift.grid;
  j["pruned_mass"] = lift.pruned_mass;
  json atoms = json::array();
  for (const auto& a : lift.atoms)
    atoms.push_back({{"curve", curve_to_json(a.curve)}, {"weight", a.weight}});
  j["atoms"] = atoms;
  return j;
}

inline Lift lift_from_json(const json& j) {
  auto space = std::make_shared<const MetricSpace>(space_from_json(j.at("space")));
  std::vector<LiftAtom> atoms;
  for (const auto& row : j.at("atoms"))
    atoms.push_back(
        {curve_from_json(space->size(), row.at("curve")), row.at("weight").get<double>()});
  std::vector<double> grid;
  if (j.contains("grid")) grid = j["grid"].get<std::vector<double>>();
  return make_lift(std::move(space), std::move(atoms), std::move(grid));
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot open for writing: " + path);
  out << content;
}

// CSV: per-cell increments with density estimates.
inline std::string increments_csv(const MeasureCurve& mc) {
  const auto inc = curve_increments(mc);
  std::string s = "t_lo,t_hi,w1_increment,density\n";
  for (std::size_t i = 0; i < inc.size(); ++i) {
    const double dt = mc.grid[i + 1] - mc.grid[i];
    s += fmt12(mc.grid[i]) + "," + fmt12(mc.grid[i + 1]) + "," + fmt12(inc[i]) + "," +
         fmt12(inc[i] / dt) + "\n";
  }
  return s;
}

// CSV: one row per velocity entry and step.
inline std::string velocity_csv(const MeasureCurve& mc, const std::vector<StepVelocity>& fields) {
  std::string s = "t,x,y,v,contribution\n";
  for (std::size_t i = 0; i < fields.size(); ++i)
    for (const auto& [key, rate] : fields[i].rate) {
      const double contrib = mc.space().d(key.first, key.second) * rate *
                             mc.measures[i](key.first);
      s += fmt12(fields[i].t0) + "," + std::to_string(key.first) + "," +
           std::to_string(key.second) + "," + fmt12(rate) + "," + fmt12(contrib) + "\n";
    }
  return s;
}

// CSV: lift atoms flattened to (atom, weight, jump_time, from, to, distance).
inline std::string lift_csv(const Lift& lift) {
  std::string s = "atom,weight,jump_time,from,to,distance\n";
  for (std::size_t k = 0; k < lift.atoms.size(); ++k) {
    const auto& a = lift.atoms[k];
    if (a.curve.jump_times.empty())
      s += std::to_string(k) + "," + fmt12(a.weight) + ",,,," + "\n";
    for (std::size_t m = 0; m < a.curve.jump_times.size(); ++m)
      s += std::to_string(k) + "," + fmt12(a.weight) + "," + fmt12(a.curve.jump_times[m]) + "," +
           std::to_string(a.curve.value_before(m)) + "," + std::to_string(a.curve.value_after(m)) +
           "," + fmt12(lift.space().d(a.curve.value_before(m), a.curve.value_after(m))) + "\n";
  }
  return s;
}

// CSV: sampled trajectories of lift atoms (long format for plotting).
inline std::string trajectories_csv(const Lift& lift, const std::vector<double>& times) {
  std::string s = "atom,weight,t,value,coord\n";
  for (std::size_t k = 0; k < lift.atoms.size(); ++k)
    for (double t : times) {
      const std::size_t x = lift.atoms[k].curve.eval(t);
      const double coord = lift.space().line_embedded() ? lift.space().coord1d(x) : 0.0;
      s += std::to_string(k) + "," + fmt12(lift.atoms[k].weight) + "," + fmt12(t) + "," +
           std::to_string(x) + "," + fmt12(coord) + "\n";
    }
  return s;
}

}  // namespace w1::io
