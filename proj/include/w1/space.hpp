#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "w1/common.hpp"

namespace w1 {

// Finite metric space: point labels, an optional Euclidean embedding and a
// validated distance matrix.  Measures and curves reference points by index.
struct MetricSpace {
  std::vector<std::string> labels;
  std::optional<std::vector<std::vector<double>>> coords;
  std::vector<std::vector<double>> dist;

  std::size_t size() const { return dist.size(); }
  double d(std::size_t i, std::size_t j) const { return dist[i][j]; }

  bool line_embedded() const {
    return coords.has_value() && !coords->empty() && (*coords)[0].size() == 1;
  }
  double coord1d(std::size_t i) const { return (*coords)[i][0]; }
};

struct MetricViolation {
  std::string axiom;  // "square", "diagonal", "positivity", "symmetry", "triangle", "embedding"
  std::size_t i = 0, j = 0, k = 0;
  std::string detail;
};

inline double euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

// Checks every metric axiom and (when coords are present) consistency with
// the Euclidean embedding.  Empty result means the space is valid.
//
// The O(n^3) triangle scan is run exhaustively for small spaces or when no
// embedding is available.  For larger embedded spaces the pairwise embedding
// check (1e-12) already implies the triangle inequality, so the cubic scan
// is skipped there.
inline std::vector<MetricViolation> validate_metric(const MetricSpace& space) {
  std::vector<MetricViolation> out;
  const std::size_t n = space.dist.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (space.dist[i].size() != n) {
      out.push_back({"square", i, 0, 0, "row " + std::to_string(i) + " has wrong length"});
      return out;  // structurally broken, nothing else is meaningful
    }
  }
  if (!space.labels.empty() && space.labels.size() != n)
    out.push_back({"square", 0, 0, 0, "label count differs from matrix size"});

  for (std::size_t i = 0; i < n; ++i) {
    if (space.dist[i][i] != 0.0)
      out.push_back({"diagonal", i, i, 0, "dist[i][i] != 0"});
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!(space.dist[i][j] > 0.0))
        out.push_back({"positivity", i, j, 0, "dist[i][j] <= 0 for i != j"});
      if (space.dist[i][j] != space.dist[j][i])
        out.push_back({"symmetry", i, j, 0, "dist[i][j] != dist[j][i]"});
    }
  }

  bool embedding_ok = false;
  if (space.coords) {
    const auto& c = *space.coords;
    if (c.size() != n) {
      out.push_back({"embedding", 0, 0, 0, "coords count differs from matrix size"});
    } else {
      embedding_ok = true;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          const double e = euclidean(c[i], c[j]);
          if (std::abs(e - space.dist[i][j]) > 1e-12) {
            out.push_back({"embedding", i, j, 0, "dist differs from Euclidean distance of coords"});
            embedding_ok = false;
          }
        }
    }
  }

  // Euclidean distances satisfy the triangle inequality identically, so a
  // verified embedding certifies it without the cubic scan.
  if (!embedding_ok || n <= 64) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k)
          if (space.dist[i][k] > space.dist[i][j] + space.dist[j][k] + 1e-12) {
            out.push_back({"triangle", i, j, k, "dist[i][k] > dist[i][j] + dist[j][k]"});
          }
  }
  return out;
}

namespace detail {
inline void throw_if_invalid(const MetricSpace& space, const char* what) {
  auto v = validate_metric(space);
  if (!v.empty()) {
    std::ostringstream os;
    os << what << ": metric validation failed (" << v.size() << " violation(s); first: "
       << v[0].axiom << " at (" << v[0].i << "," << v[0].j << "," << v[0].k << "))";
    throw input_error(os.str());
  }
}
}  // namespace detail

// Builds a validated space.  Exactly one of coords/dist may be omitted; when
// both are given their consistency is part of validation.
inline MetricSpace make_space(std::vector<std::string> labels,
                              std::optional<std::vector<std::vector<double>>> coords,
                              std::optional<std::vector<std::vector<double>>> dist) {
  if (!coords && !dist) throw input_error("make_space: need coords or dist");
  MetricSpace s;
  if (coords && coords->empty()) throw input_error("make_space: empty coords");
  if (dist && dist->empty()) throw input_error("make_space: empty dist");
  const std::size_t n = coords ? coords->size() : dist->size();
  s.labels = std::move(labels);
  if (s.labels.empty())
    for (std::size_t i = 0; i < n; ++i) s.labels.push_back("p" + std::to_string(i));
  s.coords = std::move(coords);
  if (dist) {
    s.dist = std::move(*dist);
  } else {
    s.dist.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s.dist[i][j] = euclidean((*s.coords)[i], (*s.coords)[j]);
  }
  detail::throw_if_invalid(s, "make_space");
  return s;
}

// Space of points on the real line.  Coordinates must be strictly increasing;
// duplicates would break the discreteness requirement r_x > 0.
inline MetricSpace line_space(const std::vector<double>& xs) {
  if (xs.empty()) throw input_error("line_space: empty coordinate list");
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1]))
      throw input_error("line_space: coordinates must be strictly increasing");
  std::vector<std::vector<double>> coords;
  coords.reserve(xs.size());
  for (double x : xs) coords.push_back({x});
  return make_space({}, std::move(coords), std::nullopt);
}

}  // namespace w1
