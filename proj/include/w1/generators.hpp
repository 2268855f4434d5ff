#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "w1/common.hpp"
#include "w1/measure.hpp"
#include "w1/measure_curve.hpp"
#include "w1/space.hpp"
#include "w1/step_curve.hpp"

namespace w1 {

// Depth-k approximant of the Cantor function: the standard piecewise-linear
// recursion, identity at depth 0.  Exact plateau values (c_k(1/3) = 1/2 for
// every k >= 1).
inline double cantor_function(int depth, double t) {
  if (depth < 0) throw input_error("cantor_function: negative depth");
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  double base = 0.0, amp = 1.0;
  for (int d = 0; d < depth; ++d) {
    if (t < 1.0 / 3.0) {
      t *= 3.0;
      amp /= 2.0;
    } else if (t <= 2.0 / 3.0) {
      return base + amp / 2.0;
    } else {
      base += amp / 2.0;
      amp /= 2.0;
      t = 3.0 * t - 2.0;
    }
  }
  return base + amp * t;
}

// mu_t = (1-t) mu0 + t mu1 on a shared space.
inline MeasureCurve gen_linear(std::shared_ptr<const MetricSpace> space, DiscreteMeasure mu0,
                               DiscreteMeasure mu1, std::vector<double> grid) {
  check_measure(*space, mu0, "gen_linear(mu0)");
  check_measure(*space, mu1, "gen_linear(mu1)");
  GeneratorSpec spec;
  spec.name = "linear";
  spec.payload = {mu0.weights, mu1.weights};
  auto sampler = [mu0, mu1](double t) {
    DiscreteMeasure m;
    m.weights.resize(mu0.size());
    for (std::size_t x = 0; x < mu0.size(); ++x)
      m.weights[x] = (1.0 - t) * mu0(x) + t * mu1(x);
    return m;
  };
  return make_generated_curve(std::move(space), std::move(grid), sampler, std::move(spec));
}

// Linear interpolation through a list of (time, measure) waypoints; the
// discrete stand-in for arbitrary AC curves (e.g. the backtracking curve).
inline MeasureCurve gen_piecewise_linear(std::shared_ptr<const MetricSpace> space,
                                         std::vector<double> waypoint_times,
                                         std::vector<DiscreteMeasure> waypoints,
                                         std::vector<double> grid) {
  check_grid(waypoint_times);
  if (waypoints.size() != waypoint_times.size())
    throw input_error("gen_piecewise_linear: one measure per waypoint time");
  for (const auto& m : waypoints) check_measure(*space, m, "gen_piecewise_linear");
  GeneratorSpec spec;
  spec.name = "piecewise_linear";
  spec.payload.push_back(waypoint_times);
  for (const auto& m : waypoints) spec.payload.push_back(m.weights);
  auto sampler = [waypoint_times, waypoints](double t) {
    auto it = std::upper_bound(waypoint_times.begin(), waypoint_times.end(), t);
    std::size_t hi = std::min<std::size_t>(it - waypoint_times.begin(), waypoint_times.size() - 1);
    std::size_t lo = hi - 1;
    if (t <= waypoint_times.front()) return waypoints.front();
    const double a = waypoint_times[lo], b = waypoint_times[hi];
    const double lam = (t - a) / (b - a);
    DiscreteMeasure m;
    m.weights.resize(waypoints[lo].size());
    for (std::size_t x = 0; x < m.weights.size(); ++x)
      m.weights[x] = (1.0 - lam) * waypoints[lo](x) + lam * waypoints[hi](x);
    return m;
  };
  return make_generated_curve(std::move(space), std::move(grid), sampler, std::move(spec));
}

// The Cantor-function curve mu_t = (1 - c(t)) delta_0 + c(t) delta_1 at a
// fixed approximation depth; jump curves superpose to a continuous-singular
// Wasserstein curve.
inline MeasureCurve gen_cantor(int depth, std::vector<double> grid) {
  auto space = std::make_shared<const MetricSpace>(line_space({0.0, 1.0}));
  GeneratorSpec spec;
  spec.name = "cantor";
  spec.scalars["depth"] = depth;
  auto sampler = [depth](double t) {
    const double c = cantor_function(depth, t);
    return DiscreteMeasure{{1.0 - c, c}};
  };
  return make_generated_curve(std::move(space), std::move(grid), sampler, std::move(spec));
}

// One horizontal slice of the 2D strip example: uniform density 1/(2 eps) on
// the left strip plus background 1/2 Lebesgue before time y, the strip
// teleporting to the right side after y.  Discretized on `cells` uniform
// cells of [0, 1] (cell centers carry the mass).
inline MeasureCurve gen_slice2d(double eps, double y, std::size_t cells,
                                std::vector<double> grid) {
  if (!(eps > 0.0 && eps < 0.5)) throw input_error("gen_slice2d: eps outside (0, 1/2)");
  if (!(y > 0.0 && y < 1.0)) throw input_error("gen_slice2d: y outside (0, 1)");
  if (cells < 4) throw input_error("gen_slice2d: need at least 4 cells");
  std::vector<double> centers(cells);
  for (std::size_t i = 0; i < cells; ++i)
    centers[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(cells);
  auto space = std::make_shared<const MetricSpace>(line_space(centers));

  const double w = 1.0 / static_cast<double>(cells);
  auto strip_weights = [&](double lo, double hi) {
    std::vector<double> m(cells, 0.0);
    for (std::size_t i = 0; i < cells; ++i) {
      const double a = static_cast<double>(i) * w, b = a + w;
      const double overlap = std::max(0.0, std::min(b, hi) - std::max(a, lo));
      m[i] = overlap / (2.0 * eps) + w / 2.0;
    }
    return DiscreteMeasure{m};
  };
  const DiscreteMeasure left = strip_weights(0.0, eps);
  const DiscreteMeasure right = strip_weights(1.0 - eps, 1.0);

  GeneratorSpec spec;
  spec.name = "slice2d";
  spec.scalars["eps"] = eps;
  spec.scalars["y"] = y;
  spec.scalars["cells"] = static_cast<double>(cells);
  auto sampler = [left, right, y](double t) { return t <= y ? left : right; };
  return make_generated_curve(std::move(space), std::move(grid), sampler, std::move(spec));
}

inline std::vector<double> slice2d_default_grid(double y, std::size_t time_cells = 16) {
  std::vector<double> g;
  for (std::size_t i = 0; i <= time_cells; ++i)
    g.push_back(static_cast<double>(i) / static_cast<double>(time_cells));
  g.push_back(y);
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  return g;
}

// Periodic-translation construction: sigma is the periodic extension of a
// discrete sigma_0 on the uniform K-grid of [0,1); the curve
// gamma^(alpha)(t) = sigma((alpha, alpha+t]) is computed by exact partial
// sums with wraparound, alpha running over the same grid with equal weights.
// Produces the measure curve together with its canonical lift atoms.
struct PeriodicSigma {
  MeasureCurve curve;
  std::vector<StepCurve> lift_curves;  // one per alpha, weight 1/K each
  std::vector<double> lift_weights;
};

inline PeriodicSigma gen_periodic_sigma(const std::vector<double>& sigma0,
                                        std::vector<double> grid) {
  const std::size_t K = sigma0.size();
  if (K < 2) throw input_error("gen_periodic_sigma: need at least 2 grid cells");
  double tot = 0.0;
  for (double m : sigma0) {
    if (m < 0.0) throw input_error("gen_periodic_sigma: negative sigma0 mass");
    tot += m;
  }
  if (std::abs(tot - 1.0) > kMassEps)
    throw input_error("gen_periodic_sigma: sigma0 must sum to 1");

  // prefix[j] = mass of atoms 0..j-1 over two periods
  std::vector<double> prefix(2 * K + 1, 0.0);
  for (std::size_t j = 0; j < 2 * K; ++j) prefix[j + 1] = prefix[j] + sigma0[j % K];
  auto run_sum = [prefix](std::size_t a, std::size_t l) {  // atoms a+1 .. a+l
    return prefix[a + l + 1] - prefix[a + 1];
  };

  // All reachable partial-sum values, snapped within 1e-12 to absorb float
  // noise between mathematically equal sums.
  std::vector<double> vals;
  for (std::size_t a = 0; a < K; ++a)
    for (std::size_t l = 0; l <= K; ++l) vals.push_back(run_sum(a, l));
  std::sort(vals.begin(), vals.end());
  std::vector<double> reps;
  for (double v : vals)
    if (reps.empty() || v - reps.back() > 1e-12) reps.push_back(v);
  auto space = std::make_shared<const MetricSpace>(line_space(reps));
  auto index_of = [reps](double v) {
    auto it = std::lower_bound(reps.begin(), reps.end(), v - 1e-12);
    return static_cast<std::size_t>(it - reps.begin());
  };

  const double Kd = static_cast<double>(K);
  auto atoms_in_window = [Kd](double t) {
    if (t >= 1.0) return static_cast<std::size_t>(Kd);
    return static_cast<std::size_t>(std::floor(t * Kd + 1e-9));
  };
  GeneratorSpec spec;
  spec.name = "periodic_sigma";
  spec.scalars["K"] = Kd;
  spec.payload = {sigma0};
  auto sampler = [K, Kd, run_sum, index_of, atoms_in_window, reps](double t) {
    const std::size_t l = atoms_in_window(t);
    DiscreteMeasure m;
    m.weights.assign(reps.size(), 0.0);
    for (std::size_t a = 0; a < K; ++a) m.weights[index_of(run_sum(a, l))] += 1.0 / Kd;
    return m;
  };

  PeriodicSigma out;
  out.curve = make_generated_curve(space, std::move(grid), sampler, std::move(spec));
  for (std::size_t a = 0; a < K; ++a) {
    std::vector<double> jumps;
    std::vector<std::size_t> values{index_of(0.0)};
    for (std::size_t l = 1; l <= K; ++l) {
      jumps.push_back(static_cast<double>(l) / Kd);
      values.push_back(index_of(run_sum(a, l)));
    }
    out.lift_curves.push_back(make_step_curve(space->size(), std::move(jumps), std::move(values)));
    out.lift_weights.push_back(1.0 / Kd);
  }
  return out;
}

inline std::vector<double> periodic_grid(std::size_t K) {
  std::vector<double> g(K + 1);
  for (std::size_t i = 0; i <= K; ++i) g[i] = static_cast<double>(i) / static_cast<double>(K);
  return g;
}

// sigma0 presets used throughout the examples.
inline std::vector<double> sigma0_uniform(std::size_t K) {
  return std::vector<double>(K, 1.0 / static_cast<double>(K));
}
inline std::vector<double> sigma0_delta0(std::size_t K) {
  std::vector<double> s(K, 0.0);
  s[0] = 1.0;
  return s;
}
// Depth-k Cantor measure binned onto the uniform K-grid of [0,1).
inline std::vector<double> sigma0_cantor(std::size_t K, int depth) {
  std::vector<double> s(K);
  for (std::size_t j = 0; j < K; ++j)
    s[j] = cantor_function(depth, static_cast<double>(j + 1) / static_cast<double>(K)) -
           cantor_function(depth, static_cast<double>(j) / static_cast<double>(K));
  return s;
}

}  // namespace w1
