#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "w1/common.hpp"
#include "w1/lift.hpp"
#include "w1/measure_curve.hpp"

namespace w1 {

// Velocity field for one grid step: v^x(y) is a nonnegative rate per unit
// time for y != x, defined only where mu_{t0}(x) > 0.
struct StepVelocity {
  double t0 = 0.0, t1 = 1.0;
  std::map<std::pair<std::size_t, std::size_t>, double> rate;

  double h() const { return t1 - t0; }
  double at(std::size_t x, std::size_t y) const {
    auto it = rate.find({x, y});
    return it == rate.end() ? 0.0 : it->second;
  }
};

// Disintegration of the lift at step i: the joint occupancy of consecutive
// grid times, conditioned on the start point and divided by the step width.
inline StepVelocity extract_velocity(const Lift& lift, const MeasureCurve& mc, std::size_t step) {
  if (step + 1 >= mc.grid.size()) throw input_error("extract_velocity: step out of range");
  const double t0 = mc.grid[step], t1 = mc.grid[step + 1];
  const double h = t1 - t0;
  const auto& mu = mc.measures[step];
  const auto& mu_next = mc.measures[step + 1];

  std::vector<double> push0(mc.space().size(), 0.0), push1(mc.space().size(), 0.0);
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  for (const auto& a : lift.atoms) {
    const std::size_t x = a.curve.eval(t0), y = a.curve.eval(t1);
    push0[x] += a.weight;
    push1[y] += a.weight;
    if (x != y) joint[{x, y}] += a.weight;
  }
  for (std::size_t x = 0; x < push0.size(); ++x)
    if (std::abs(push0[x] - mu(x)) > kEps || std::abs(push1[x] - mu_next(x)) > kEps)
      throw input_error("extract_velocity: lift marginals do not match the curve at this step");

  StepVelocity v;
  v.t0 = t0;
  v.t1 = t1;
  for (const auto& [key, mass] : joint) {
    const double m = mu(key.first);
    if (m <= 0.0) continue;  // disintegration undefined on null points
    v.rate[key] = mass / (h * m);
  }
  return v;
}

// Residual of the discrete mass balance at one step:
// (mu_{t1}(x) - mu_{t0}(x)) / h - (inflow(x) - outflow(x)).
inline std::vector<double> current_residual(const MeasureCurve& mc, const StepVelocity& v,
                                            std::size_t step) {
  const auto& mu = mc.measures[step];
  const auto& mu_next = mc.measures[step + 1];
  const double h = v.h();
  std::vector<double> res(mc.space().size(), 0.0);
  for (std::size_t x = 0; x < res.size(); ++x) res[x] = (mu_next(x) - mu(x)) / h;
  for (const auto& [key, rate] : v.rate) {
    const auto [x, y] = key;
    res[y] -= rate * mu(x);  // inflow into y
    res[x] += rate * mu(x);  // outflow from x
  }
  return res;
}

// lhs: W1 rate of the step.  rhs: sum d(x,y) v^x(y) mu(x).  Fields from
// optimal couplings attain equality; any feasible field dominates.
struct SpeedIdentity {
  double lhs = 0.0;
  double rhs = 0.0;
};

inline SpeedIdentity speed_identity(const MeasureCurve& mc, const StepVelocity& v,
                                    std::size_t step) {
  SpeedIdentity si;
  si.lhs = solve_w1(mc.space(), mc.measures[step], mc.measures[step + 1]).distance / v.h();
  for (const auto& [key, rate] : v.rate)
    si.rhs += mc.space().d(key.first, key.second) * rate * mc.measures[step](key.first);
  return si;
}

// Diagnostic for graph-structured transport: total rate mass of a field
// supported outside a prescribed edge set.  No existence claim is attached.
inline double off_edge_rate(const MeasureCurve& mc, const StepVelocity& v, std::size_t step,
                            const std::set<std::pair<std::size_t, std::size_t>>& edges) {
  double s = 0.0;
  for (const auto& [key, rate] : v.rate)
    if (!edges.count(key) && !edges.count({key.second, key.first}))
      s += rate * mc.measures[step](key.first);
  return s;
}

struct BenamouBrenierCandidate {
  std::string name;
  MeasureCurve curve;
  std::vector<StepVelocity> fields;  // one per grid cell
};

struct BenamouBrenierReport {
  struct Row {
    std::string name;
    bool accepted = false;
    double action = 0.0;
    double max_residual = 0.0;
    std::string reject_reason;
  };
  std::vector<Row> rows;
  double w1_distance = 0.0;
  double min_action = 0.0;
  bool lower_bound_ok = false;  // min action >= W1 - tol over accepted rows
  bool attained = false;        // some accepted row matches W1 within tol
};

// Compares the time-integrated transport cost of candidate (curve, field)
// pairs against W1(mu0, mu1): every admissible pair costs at least the
// distance, and the optimal-lift field attains it.
inline BenamouBrenierReport benamou_brenier_compare(
    const MetricSpace& space, const DiscreteMeasure& mu0, const DiscreteMeasure& mu1,
    const std::vector<BenamouBrenierCandidate>& candidates, double residual_tol = 1e-8,
    double tol = 1e-8) {
  BenamouBrenierReport rep;
  rep.w1_distance = solve_w1(space, mu0, mu1).distance;
  rep.min_action = std::numeric_limits<double>::infinity();
  for (const auto& cand : candidates) {
    BenamouBrenierReport::Row row;
    row.name = cand.name;
    if (cand.fields.size() != cand.curve.steps()) {
      row.reject_reason = "one field per grid cell required";
      rep.rows.push_back(row);
      continue;
    }
    double end_err = 0.0;
    for (std::size_t x = 0; x < space.size(); ++x) {
      end_err = std::max(end_err, std::abs(cand.curve.front()(x) - mu0(x)));
      end_err = std::max(end_err, std::abs(cand.curve.back()(x) - mu1(x)));
    }
    if (end_err > kEps) {
      row.reject_reason = "endpoints differ from mu0/mu1";
      rep.rows.push_back(row);
      continue;
    }
    for (std::size_t i = 0; i < cand.fields.size(); ++i) {
      for (double r : current_residual(cand.curve, cand.fields[i], i))
        row.max_residual = std::max(row.max_residual, std::abs(r));
      double rhs = 0.0;
      for (const auto& [key, rate] : cand.fields[i].rate)
        rhs += space.d(key.first, key.second) * rate * cand.curve.measures[i](key.first);
      row.action += cand.fields[i].h() * rhs;
    }
    if (row.max_residual > residual_tol) {
      row.reject_reason = "current-equation residual too large";
      rep.rows.push_back(row);
      continue;
    }
    row.accepted = true;
    rep.min_action = std::min(rep.min_action, row.action);
    if (std::abs(row.action - rep.w1_distance) <= tol) rep.attained = true;
    rep.rows.push_back(row);
  }
  rep.lower_bound_ok = rep.min_action >= rep.w1_distance - tol;
  return rep;
}

}  // namespace w1
