#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "w1/common.hpp"
#include "w1/measure.hpp"
#include "w1/space.hpp"

namespace w1 {

struct CouplingEntry {
  std::size_t i, j;
  double mass;
};

// Sparse joint weight matrix with prescribed marginals; rows/cols reference
// one MetricSpace.  Entries are kept sorted by (i, j).
struct Coupling {
  std::size_t n = 0;  // space size
  std::vector<CouplingEntry> entries;

  std::vector<double> first_marginal() const {
    std::vector<double> m(n, 0.0);
    for (const auto& e : entries) m[e.i] += e.mass;
    return m;
  }
  std::vector<double> second_marginal() const {
    std::vector<double> m(n, 0.0);
    for (const auto& e : entries) m[e.j] += e.mass;
    return m;
  }
  double total_mass() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.mass;
    return s;
  }
  double cost(const MetricSpace& space) const {
    double s = 0.0;
    for (const auto& e : entries) s += space.d(e.i, e.j) * e.mass;
    return s;
  }
  void sort_entries() {
    std::sort(entries.begin(), entries.end(), [](const CouplingEntry& a, const CouplingEntry& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
  }
};

// Kantorovich-Rubinstein certificate: a 1-Lipschitz potential phi over all
// space points with sum phi d(mu - nu) equal to the primal cost up to
// reported_gap.
struct DualCertificate {
  std::vector<double> potential;
  double reported_gap = 0.0;

  double pairing(const DiscreteMeasure& mu, const DiscreteMeasure& nu) const {
    double s = 0.0;
    for (std::size_t x = 0; x < potential.size(); ++x) s += potential[x] * (mu(x) - nu(x));
    return s;
  }
};

struct W1Result {
  double distance = 0.0;
  Coupling coupling;
  DualCertificate cert;
};

namespace detail {

// Successive shortest paths on the bipartite transportation graph, after
// common mass has been removed (sources and sinks are disjoint).  Dijkstra
// with node potentials; ties broken by lowest node index so the output is
// deterministic.
struct SspSolver {
  const MetricSpace& space;
  const std::vector<std::size_t>& src;  // space indices, supply > 0
  const std::vector<std::size_t>& snk;  // space indices, demand > 0
  std::vector<double> supply, demand;
  std::vector<std::vector<double>> flow;  // src x snk
  std::vector<double> pi;                 // node potentials, sources then sinks
  double max_iters;

  SspSolver(const MetricSpace& sp, const std::vector<std::size_t>& s,
            const std::vector<std::size_t>& t, std::vector<double> a, std::vector<double> b)
      : space(sp), src(s), snk(t), supply(std::move(a)), demand(std::move(b)) {
    flow.assign(src.size(), std::vector<double>(snk.size(), 0.0));
    pi.assign(src.size() + snk.size(), 0.0);
    max_iters = 64.0 * static_cast<double>(src.size() + snk.size() + 4) *
                static_cast<double>(src.size() + snk.size() + 4);
  }

  double arc_cost(std::size_t s, std::size_t t) const { return space.d(src[s], snk[t]); }

  void run() {
    const std::size_t ns = src.size(), nt = snk.size(), nn = ns + nt;
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(nn);
    std::vector<int> parent(nn);  // for sinks: source of tree arc; for sources: sink of tree arc
    double iters = 0;
    while (true) {
      bool have_supply = false, have_demand = false;
      for (std::size_t s = 0; s < ns; ++s)
        if (supply[s] > kAtomPrune) have_supply = true;
      for (std::size_t t = 0; t < nt; ++t)
        if (demand[t] > kAtomPrune) have_demand = true;
      if (!have_supply || !have_demand) break;
      if (++iters > max_iters)
        throw std::runtime_error("w1: successive-shortest-path iteration cap exceeded");

      // Multi-source Dijkstra over reduced costs.  Active sources start at
      // Cmax - pi so every initial label is nonnegative.
      std::fill(dist.begin(), dist.end(), inf);
      std::fill(parent.begin(), parent.end(), -1);
      double cmax = -inf;
      for (std::size_t s = 0; s < ns; ++s)
        if (supply[s] > kAtomPrune) cmax = std::max(cmax, pi[s]);
      using Item = std::pair<double, std::size_t>;
      std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
      for (std::size_t s = 0; s < ns; ++s)
        if (supply[s] > kAtomPrune) {
          dist[s] = cmax - pi[s];
          pq.push({dist[s], s});
        }
      std::vector<char> settled(nn, 0);
      while (!pq.empty()) {
        auto [dv, v] = pq.top();
        pq.pop();
        if (settled[v] || dv > dist[v]) continue;
        settled[v] = 1;
        if (v < ns) {
          const std::size_t s = v;
          for (std::size_t t = 0; t < nt; ++t) {
            double rc = arc_cost(s, t) + pi[s] - pi[ns + t];
            if (rc < 0.0) rc = 0.0;  // guard fp drift in the invariant
            if (dist[s] + rc < dist[ns + t]) {
              dist[ns + t] = dist[s] + rc;
              parent[ns + t] = static_cast<int>(s);
              pq.push({dist[ns + t], ns + t});
            }
          }
        } else {
          const std::size_t t = v - ns;
          for (std::size_t s = 0; s < ns; ++s) {
            if (flow[s][t] <= 0.0) continue;
            double rc = -arc_cost(s, t) + pi[ns + t] - pi[s];
            if (rc < 0.0) rc = 0.0;
            if (dist[ns + t] + rc < dist[s]) {
              dist[s] = dist[ns + t] + rc;
              parent[s] = static_cast<int>(t);
              pq.push({dist[s], s});
            }
          }
        }
      }

      // Deficit node: smallest label, lowest index on ties.
      std::size_t best = nn;
      for (std::size_t t = 0; t < nt; ++t)
        if (demand[t] > kAtomPrune && dist[ns + t] < inf &&
            (best == nn || dist[ns + t] < dist[ns + best]))
          best = t;
      if (best == nn) throw std::runtime_error("w1: no augmenting path (unbalanced problem?)");

      // Walk the tree back to the root source, collecting the bottleneck.
      double bottleneck = demand[best];
      {
        std::size_t t = best;
        while (true) {
          std::size_t s = static_cast<std::size_t>(parent[ns + t]);
          if (parent[s] < 0) {
            bottleneck = std::min(bottleneck, supply[s]);
            break;
          }
          std::size_t tprev = static_cast<std::size_t>(parent[s]);
          bottleneck = std::min(bottleneck, flow[s][tprev]);
          t = tprev;
        }
      }
      {
        std::size_t t = best;
        while (true) {
          std::size_t s = static_cast<std::size_t>(parent[ns + t]);
          flow[s][t] += bottleneck;
          if (parent[s] < 0) {
            supply[s] -= bottleneck;
            break;
          }
          std::size_t tprev = static_cast<std::size_t>(parent[s]);
          flow[s][tprev] -= bottleneck;
          t = tprev;
        }
        demand[best] -= bottleneck;
      }
      for (std::size_t v = 0; v < nn; ++v)
        if (dist[v] < inf) pi[v] += dist[v];
    }
  }
};

}  // namespace detail

// Exact 1-Wasserstein distance with an optimal coupling and a dual
// certificate.  Deterministic for identical inputs.
inline W1Result solve_w1(const MetricSpace& space, const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  check_measure(space, mu, "solve_w1(mu)");
  check_measure(space, nu, "solve_w1(nu)");
  const std::size_t n = space.size();
  if (std::abs(mu.total() - nu.total()) > kEps) throw input_error("w1: marginal masses differ");

  W1Result res;
  res.coupling.n = n;
  res.cert.potential.assign(n, 0.0);

  // Keeping common mass in place is optimal for metric costs; the residual
  // problem then has disjoint supports.
  std::vector<double> a(n, 0.0), b(n, 0.0);
  double moved = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    const double rho = std::min(mu(x), nu(x));
    if (rho > 0.0) res.coupling.entries.push_back({x, x, rho});
    a[x] = mu(x) - rho;
    b[x] = nu(x) - rho;
    moved += a[x];
  }
  if (moved <= 1e-12) {
    res.coupling.sort_entries();
    return res;  // distance 0, phi = 0
  }

  std::vector<std::size_t> src, snk;
  std::vector<double> av, bv;
  for (std::size_t x = 0; x < n; ++x) {
    if (a[x] > 0.0) {
      src.push_back(x);
      av.push_back(a[x]);
    }
    if (b[x] > 0.0) {
      snk.push_back(x);
      bv.push_back(b[x]);
    }
  }

  detail::SspSolver solver(space, src, snk, av, bv);
  solver.run();

  double cost = 0.0;
  for (std::size_t s = 0; s < src.size(); ++s)
    for (std::size_t t = 0; t < snk.size(); ++t)
      if (solver.flow[s][t] > 0.0) {
        res.coupling.entries.push_back({src[s], snk[t], solver.flow[s][t]});
        cost += space.d(src[s], snk[t]) * solver.flow[s][t];
      }
  res.coupling.sort_entries();
  res.distance = cost;

  // Dual potentials: u on sources from the final node potentials, then a
  // c-transform pass so phi is 1-Lipschitz on the whole space.
  std::vector<double> u(src.size());
  for (std::size_t s = 0; s < src.size(); ++s) u[s] = -solver.pi[s];
  std::vector<double> vhat(snk.size());
  for (std::size_t t = 0; t < snk.size(); ++t) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < src.size(); ++s)
      m = std::min(m, space.d(src[s], snk[t]) - u[s]);
    vhat[t] = m;
  }
  for (std::size_t x = 0; x < n; ++x) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < snk.size(); ++t)
      m = std::min(m, space.d(x, snk[t]) - vhat[t]);
    res.cert.potential[x] = m;
  }
  res.cert.reported_gap = std::abs(res.distance - res.cert.pairing(mu, nu));
  return res;
}

// Monotone (quantile) coupling on a line-embedded space: greedy fill in
// coordinate order.  Optimal for W1 on the line; the lift construction uses
// it as its canonical element of Opt because chains of monotone couplings
// glue with additive support growth.
inline Coupling monotone_coupling(const MetricSpace& space, const DiscreteMeasure& mu,
                                  const DiscreteMeasure& nu) {
  if (!space.line_embedded())
    throw unsupported_error("monotone_coupling: space has no 1-d embedding");
  check_measure(space, mu, "monotone_coupling(mu)");
  check_measure(space, nu, "monotone_coupling(nu)");
  std::vector<std::size_t> order(space.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return space.coord1d(a) < space.coord1d(b); });
  std::vector<std::size_t> rows, cols;
  for (std::size_t k : order) {
    if (mu(k) > 0.0) rows.push_back(k);
    if (nu(k) > 0.0) cols.push_back(k);
  }
  Coupling c;
  c.n = space.size();
  std::size_t r = 0, s = 0;
  double mrow = rows.empty() ? 0.0 : mu(rows[0]);
  double mcol = cols.empty() ? 0.0 : nu(cols[0]);
  while (r < rows.size() && s < cols.size()) {
    const double m = std::min(mrow, mcol);
    if (m > 0.0) c.entries.push_back({rows[r], cols[s], m});
    mrow -= m;
    mcol -= m;
    if (mrow <= 0.0 && ++r < rows.size()) mrow = mu(rows[r]);
    if (mcol <= 0.0 && ++s < cols.size()) mcol = nu(cols[s]);
  }
  c.sort_entries();
  return c;
}

inline void check_coupling_feasible(const MetricSpace& space, const Coupling& c,
                                    const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                                    double tol = kEps) {
  if (c.n != space.size()) throw input_error("coupling: size differs from space");
  for (const auto& e : c.entries) {
    if (e.i >= c.n || e.j >= c.n) throw input_error("coupling: index out of range");
    if (e.mass < 0.0) throw input_error("coupling: negative mass");
  }
  const auto r = c.first_marginal();
  const auto s = c.second_marginal();
  for (std::size_t x = 0; x < c.n; ++x) {
    if (std::abs(r[x] - mu(x)) > tol) throw input_error("coupling: first marginal mismatch");
    if (std::abs(s[x] - nu(x)) > tol) throw input_error("coupling: second marginal mismatch");
  }
}

// A coupling is optimal iff its cost matches a fresh solve between its own
// marginals within tol.
inline bool is_optimal(const MetricSpace& space, const Coupling& c, double tol = kEps) {
  auto r = c.first_marginal();
  auto s = c.second_marginal();
  const double m = c.total_mass();
  if (m <= 0.0) throw input_error("is_optimal: empty coupling");
  for (auto& w : r) w /= m;
  for (auto& w : s) w /= m;
  const auto best = solve_w1(space, DiscreteMeasure{r}, DiscreteMeasure{s});
  return c.cost(space) / m <= best.distance + tol;
}

}  // namespace w1
