#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "w1/common.hpp"
#include "w1/transport.hpp"

namespace w1 {

struct PathAtom {
  std::vector<std::size_t> path;  // one point index per marginal
  double mass;
};

// Finite multi-marginal plan stored as a sparse atom list.  Atoms below
// kAtomPrune are dropped during construction; the dropped total is tracked.
struct MultiCoupling {
  std::size_t n = 0;           // space size
  std::size_t marginals = 0;   // number of time slots
  std::vector<PathAtom> atoms;
  double pruned_mass = 0.0;

  double total_mass() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.mass;
    return s;
  }

  std::vector<double> marginal(std::size_t k) const {
    std::vector<double> m(n, 0.0);
    for (const auto& a : atoms) m[a.path[k]] += a.mass;
    return m;
  }

  // Projection onto the (k, k+1) pair of marginals.
  Coupling pair_projection(std::size_t k) const {
    std::map<std::pair<std::size_t, std::size_t>, double> agg;
    for (const auto& a : atoms) agg[{a.path[k], a.path[k + 1]}] += a.mass;
    Coupling c;
    c.n = n;
    for (const auto& [key, m] : agg) c.entries.push_back({key.first, key.second, m});
    return c;
  }
};

namespace detail {

inline void check_interface(const Coupling& left, const Coupling& right, const char* what) {
  if (left.n != right.n) throw input_error(std::string(what) + ": space size mismatch");
  const auto out = left.second_marginal();
  const auto in = right.first_marginal();
  for (std::size_t y = 0; y < left.n; ++y)
    if (std::abs(out[y] - in[y]) > kEps)
      throw input_error(std::string(what) + ": interface marginals differ at point " +
                        std::to_string(y));
}

// Extends every path by one step through `next`, conditioning on the shared
// marginal; 0/0 = 0 (null interface points carry no paths).  Support growth
// is capped so a badly branching chain fails loudly instead of exhausting
// memory.
inline constexpr std::size_t kMaxPlanAtoms = 2'000'000;

struct plan_overflow : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline MultiCoupling extend(const MultiCoupling& plan, const Coupling& next,
                            std::size_t max_atoms = kMaxPlanAtoms) {
  std::vector<double> shared = next.first_marginal();
  std::vector<std::vector<std::pair<std::size_t, double>>> by_row(next.n);
  for (const auto& e : next.entries) by_row[e.i].push_back({e.j, e.mass});

  MultiCoupling out;
  out.n = plan.n;
  out.marginals = plan.marginals + 1;
  out.pruned_mass = plan.pruned_mass;
  for (const auto& atom : plan.atoms) {
    const std::size_t y = atom.path.back();
    if (shared[y] <= 0.0) continue;  // 0/0 convention
    for (const auto& [z, m] : by_row[y]) {
      const double mass = atom.mass * m / shared[y];
      if (mass < kAtomPrune) {
        out.pruned_mass += mass;
        continue;
      }
      PathAtom na;
      na.path = atom.path;
      na.path.push_back(z);
      na.mass = mass;
      out.atoms.push_back(std::move(na));
    }
    if (out.atoms.size() > max_atoms)
      throw plan_overflow("glue_chain: plan support exceeded the atom cap");
  }
  return out;
}

}  // namespace detail

// Gluing lemma for two couplings sharing the middle marginal:
// omega(x,y,z) = c12(x,y) c23(y,z) / m(y).
inline MultiCoupling glue(const Coupling& c12, const Coupling& c23) {
  detail::check_interface(c12, c23, "glue");
  MultiCoupling base;
  base.n = c12.n;
  base.marginals = 2;
  for (const auto& e : c12.entries) base.atoms.push_back({{e.i, e.j}, e.mass});
  return detail::extend(base, c23);
}

// Iterated gluing of a chain of consecutive couplings into a plan with
// k+1 marginals whose pairwise projections reproduce the inputs.  Throws
// plan_overflow once the support passes max_atoms.
inline MultiCoupling glue_chain(const std::vector<Coupling>& chain,
                                std::size_t max_atoms = detail::kMaxPlanAtoms) {
  if (chain.empty()) throw input_error("glue_chain: empty chain");
  for (std::size_t i = 0; i + 1 < chain.size(); ++i)
    detail::check_interface(chain[i], chain[i + 1], "glue_chain");
  MultiCoupling plan;
  plan.n = chain[0].n;
  plan.marginals = 2;
  for (const auto& e : chain[0].entries) plan.atoms.push_back({{e.i, e.j}, e.mass});
  for (std::size_t i = 1; i < chain.size(); ++i) plan = detail::extend(plan, chain[i], max_atoms);
  return plan;
}

}  // namespace w1
