#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "w1/common.hpp"
#include "w1/space.hpp"

namespace w1 {

enum class IntervalKind { open, closed, left_open, right_open };

inline bool includes_left(IntervalKind k) {
  return k == IntervalKind::closed || k == IntervalKind::right_open;
}
inline bool includes_right(IntervalKind k) {
  return k == IntervalKind::closed || k == IntervalKind::left_open;
}

// Cadlag piecewise-constant curve on [0,1]: value values[k] on
// [jump_times[k-1], jump_times[k]), right-continuous by construction.
// A jump listed at exactly t = 1 means the curve is not left-continuous
// there, mirroring the endpoint continuation in the lift construction.
struct StepCurve {
  std::vector<double> jump_times;   // strictly increasing, in (0, 1]
  std::vector<std::size_t> values;  // size jump_times.size() + 1
  bool left_continuous_at_1 = true;

  std::size_t eval(double t) const {
    // number of jump times <= t
    const std::size_t k =
        std::upper_bound(jump_times.begin(), jump_times.end(), t) - jump_times.begin();
    return values[k];
  }
  std::size_t value_before(std::size_t jump_index) const { return values[jump_index]; }
  std::size_t value_after(std::size_t jump_index) const { return values[jump_index + 1]; }

  bool operator==(const StepCurve& o) const {
    return jump_times == o.jump_times && values == o.values &&
           left_continuous_at_1 == o.left_continuous_at_1;
  }
  bool operator<(const StepCurve& o) const {
    if (jump_times != o.jump_times) return jump_times < o.jump_times;
    return values < o.values;
  }
};

// Drops spurious breakpoints (consecutive equal values) and derives the
// left-continuity flag.  Idempotent.
inline StepCurve normalize(const StepCurve& in) {
  if (in.values.empty()) throw input_error("StepCurve: empty value list");
  if (in.values.size() != in.jump_times.size() + 1)
    throw input_error("StepCurve: values must have one more entry than jump times");
  double prev = 0.0;
  for (double t : in.jump_times) {
    if (!(t > prev) || t > 1.0)
      throw input_error("StepCurve: jump times must be strictly increasing in (0, 1]");
    prev = t;
  }
  StepCurve out;
  out.values.push_back(in.values[0]);
  for (std::size_t k = 0; k < in.jump_times.size(); ++k) {
    if (in.values[k + 1] == out.values.back()) continue;
    out.jump_times.push_back(in.jump_times[k]);
    out.values.push_back(in.values[k + 1]);
  }
  out.left_continuous_at_1 = out.jump_times.empty() || out.jump_times.back() < 1.0;
  return out;
}

inline StepCurve make_step_curve(std::size_t space_size, std::vector<double> jump_times,
                                 std::vector<std::size_t> values) {
  for (std::size_t v : values)
    if (v >= space_size) throw input_error("StepCurve: value index out of range");
  StepCurve c;
  c.jump_times = std::move(jump_times);
  c.values = std::move(values);
  return normalize(c);
}

inline StepCurve constant_curve(std::size_t value) {
  StepCurve c;
  c.values = {value};
  return c;
}

// Pointwise variation over an interval, partition-supremum semantics.  For a
// step curve this is the sum of jump distances at jump times t with a < t < b,
// plus the jump at b itself when the interval contains its right endpoint.
// A jump exactly at the left endpoint is invisible to partitions of the
// interval (the curve is already at its post-jump value there).
inline double pointwise_variation(const MetricSpace& space, const StepCurve& u, double a, double b,
                                  IntervalKind kind = IntervalKind::closed) {
  if (a > b) throw input_error("pointwise_variation: a > b");
  if (a < 0.0 || b > 1.0) throw input_error("pointwise_variation: interval outside [0, 1]");
  double var = 0.0;
  for (std::size_t k = 0; k < u.jump_times.size(); ++k) {
    const double t = u.jump_times[k];
    const bool interior = t > a && t < b;
    const bool right_edge = t == b && includes_right(kind);
    if (interior || right_edge) var += space.d(u.value_before(k), u.value_after(k));
  }
  return var;
}

inline double total_variation(const MetricSpace& space, const StepCurve& u) {
  return pointwise_variation(space, u, 0.0, 1.0, IntervalKind::closed);
}

// Atomic variation measure |Du|: one atom per jump, mass = jump distance.
// Interval queries use measure semantics, so an included endpoint always
// picks up its atom (unlike the partition supremum at the left endpoint).
struct AtomicVariationMeasure {
  struct Atom {
    double time;
    double mass;
  };
  std::vector<Atom> atoms;

  double total() const {
    double s = 0.0;
    for (const auto& a : atoms) s += a.mass;
    return s;
  }
  double interval_mass(double a, double b, IntervalKind kind) const {
    if (a > b) throw input_error("interval_mass: a > b");
    if (a == b) return kind == IntervalKind::closed ? point_mass(a) : 0.0;
    double s = 0.0;
    for (const auto& at : atoms) {
      const bool in = (at.time > a && at.time < b) || (at.time == a && includes_left(kind)) ||
                      (at.time == b && includes_right(kind));
      if (in) s += at.mass;
    }
    return s;
  }
  double point_mass(double t) const {
    double s = 0.0;
    for (const auto& a : atoms)
      if (a.time == t) s += a.mass;
    return s;
  }
};

inline AtomicVariationMeasure variation_measure(const MetricSpace& space, const StepCurve& u) {
  AtomicVariationMeasure m;
  for (std::size_t k = 0; k < u.jump_times.size(); ++k)
    m.atoms.push_back({u.jump_times[k], space.d(u.value_before(k), u.value_after(k))});
  return m;
}

// Integral of the difference quotient d(u(t+h), u(t))/h over [0, 1-h],
// computed exactly: the integrand is piecewise constant on the overlap of
// the jump grid with its h-shift.
inline double diff_quotient_integral(const MetricSpace& space, const StepCurve& u, double h) {
  if (!(h > 0.0 && h < 1.0)) throw input_error("diff_quotient_integral: h outside (0, 1)");
  std::vector<double> cuts{0.0, 1.0 - h};
  for (double t : u.jump_times) {
    if (t > 0.0 && t < 1.0 - h) cuts.push_back(t);
    const double shifted = t - h;
    if (shifted > 0.0 && shifted < 1.0 - h) cuts.push_back(shifted);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double len = cuts[k + 1] - cuts[k];
    if (len <= 0.0) continue;
    const double mid = cuts[k] + len / 2.0;
    total += space.d(u.eval(mid), u.eval(mid + h)) / h * len;
  }
  return total;
}

// Numerical verification of the equivalent BV definitions on one curve:
//  (a) halving the difference-quotient step never decreases the integral,
//  (b) the dyadic supremum of the integrals recovers Var(u; [0,1)),
//  (c) d(u(s), u(t)) <= |Du|((s,t]) on an exhaustive grid of pairs,
//  (d) |D(d(.,x) o u)| <= |Du| atomwise for every reference point x.
struct BvEquivalenceReport {
  bool monotone_ok = true;
  bool sandwich_ok = true;
  bool pointwise_ok = true;
  bool lipschitz_family_ok = true;
  double sup_diff_quotient = 0.0;
  double variation = 0.0;  // Var(u; [0,1)), the value the supremum recovers
  std::vector<std::string> violations;

  bool all_ok() const { return monotone_ok && sandwich_ok && pointwise_ok && lipschitz_family_ok; }
};

inline BvEquivalenceReport check_bv_equivalences(const MetricSpace& space, const StepCurve& u,
                                                 double tol = 1e-9, int max_level = 16) {
  BvEquivalenceReport rep;
  double prev = -1.0;
  for (int k = 1; k <= max_level; ++k) {
    const double h = std::ldexp(1.0, -k);
    const double lh = diff_quotient_integral(space, u, h);
    if (prev >= 0.0 && lh + tol < prev) {
      rep.monotone_ok = false;
      std::ostringstream os;
      os << "monotone halving violated at h=2^-" << k << ": " << prev << " > " << lh;
      rep.violations.push_back(os.str());
    }
    rep.sup_diff_quotient = std::max(rep.sup_diff_quotient, lh);
    prev = lh;
  }
  rep.variation = pointwise_variation(space, u, 0.0, 1.0, IntervalKind::right_open);
  if (!(rep.sup_diff_quotient <= rep.variation + tol &&
        rep.variation <= rep.sup_diff_quotient + tol)) {
    rep.sandwich_ok = false;
    std::ostringstream os;
    os << "sup_h integral " << rep.sup_diff_quotient << " vs Var " << rep.variation;
    rep.violations.push_back(os.str());
  }

  const auto dm = variation_measure(space, u);
  std::vector<double> grid{0.0};
  for (std::size_t k = 0; k < u.jump_times.size(); ++k) {
    const double t = u.jump_times[k];
    if (t < 1.0) grid.push_back(t);
    const double lo = k == 0 ? 0.0 : u.jump_times[k - 1];
    grid.push_back(lo + (t - lo) / 2.0);
  }
  const double last = u.jump_times.empty() ? 0.0 : std::min(u.jump_times.back(), 1.0 - 1e-9);
  grid.push_back(last + (1.0 - last) / 2.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (std::size_t i = 0; i < grid.size(); ++i)
    for (std::size_t j = i; j < grid.size(); ++j) {
      const double s = grid[i], t = grid[j];
      const double lhs = space.d(u.eval(s), u.eval(t));
      const double rhs = dm.interval_mass(s, t, IntervalKind::left_open);
      if (lhs > rhs + tol) {
        rep.pointwise_ok = false;
        std::ostringstream os;
        os << "d(u(s),u(t)) > |Du|((s,t]) at s=" << s << " t=" << t << ": " << lhs << " > " << rhs;
        rep.violations.push_back(os.str());
      }
    }

  for (std::size_t x = 0; x < space.size(); ++x)
    for (std::size_t k = 0; k < u.jump_times.size(); ++k) {
      const double jump = space.d(u.value_before(k), u.value_after(k));
      const double proj =
          std::abs(space.d(u.value_before(k), x) - space.d(u.value_after(k), x));
      if (proj > jump + tol) {
        rep.lipschitz_family_ok = false;
        std::ostringstream os;
        os << "|D(d(.,x) o u)| atom exceeds |Du| atom at jump " << k << ", x=" << x;
        rep.violations.push_back(os.str());
      }
    }
  return rep;
}

}  // namespace w1
