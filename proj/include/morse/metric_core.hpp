#pragma once

// Metric-space primitives over finite samples of a geodesic space: Gromov
// products, four-point hyperbolicity estimates, Hausdorff distance, closest-point
// projection sets and a sampled quasiconvexity defect.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "morse/common.hpp"

namespace morse {

enum class SpaceKind { hyperbolic_plane, metric_tree, graph };

inline std::string_view to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::hyperbolic_plane: return "h2";
    case SpaceKind::metric_tree: return "tree";
    case SpaceKind::graph: return "graph";
  }
  return "unknown";
}

/// A geodesic metric space with a chosen geodesic between any two points.
///
/// `geodesic_point(p, q, t)` is the point at arclength `t` from `p` on the chosen
/// geodesic towards `q`. `delta_hint()` is a hyperbolicity constant known to be
/// valid for the space, if any.
template <class S>
concept GeodesicSpace = requires(const S& s, const typename S::point_type& p, double t, Rng& rng) {
  { s.kind() } -> std::same_as<SpaceKind>;
  { s.distance(p, p) } -> std::convertible_to<double>;
  { s.geodesic_point(p, p, t) } -> std::same_as<typename S::point_type>;
  { s.sample_point(rng) } -> std::same_as<typename S::point_type>;
  { s.delta_hint() } -> std::same_as<std::optional<double>>;
};

template <GeodesicSpace S>
using PointOf = typename S::point_type;

/// Finite stand-in for a subset of a space. `resolution` is the spacing of the
/// discretization it came from (every point of the underlying set is within
/// resolution/2 of a member); 0 for intrinsically finite sets.
template <class P>
class PointSet {
 public:
  PointSet(std::vector<P> points, double resolution = 0.0)
      : points_(std::move(points)), resolution_(resolution) {
    if (points_.empty()) throw Error("PointSet must be nonempty");
    if (!(resolution_ >= 0.0)) throw Error("PointSet resolution must be >= 0");
  }

  const std::vector<P>& points() const { return points_; }
  double resolution() const { return resolution_; }
  std::size_t size() const { return points_.size(); }
  const P& operator[](std::size_t i) const { return points_[i]; }

 private:
  std::vector<P> points_;
  double resolution_;
};

template <GeodesicSpace S>
double gromov_product(const S& space, const PointOf<S>& x, const PointOf<S>& y, const PointOf<S>& w) {
  return 0.5 * (space.distance(x, w) + space.distance(y, w) - space.distance(x, y));
}

template <GeodesicSpace S>
struct Quadruple {
  PointOf<S> x, y, z, w;
};

/// min((x,y)_w, (y,z)_w) - (x,z)_w; the four-point condition asks this to be <= delta.
template <GeodesicSpace S>
double four_point_excess(const S& space, const Quadruple<S>& q) {
  const double xy = gromov_product(space, q.x, q.y, q.w);
  const double yz = gromov_product(space, q.y, q.z, q.w);
  const double xz = gromov_product(space, q.x, q.z, q.w);
  return std::min(xy, yz) - xz;
}

/// Lower bound for the hyperbolicity constant: the worst four-point excess over
/// the given quadruples, clamped at 0.
template <GeodesicSpace S>
double estimate_delta(const S& space, std::span<const Quadruple<S>> quadruples) {
  if (quadruples.empty()) throw Error("estimate_delta: empty quadruple list");
  double best = 0.0;
  for (const auto& q : quadruples) best = std::max(best, four_point_excess(space, q));
  return best;
}

template <GeodesicSpace S>
std::vector<Quadruple<S>> sample_quadruples(const S& space, std::size_t count, Rng& rng) {
  std::vector<Quadruple<S>> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto x = space.sample_point(rng);
    auto y = space.sample_point(rng);
    auto z = space.sample_point(rng);
    auto w = space.sample_point(rng);
    out.push_back({std::move(x), std::move(y), std::move(z), std::move(w)});
  }
  return out;
}

template <GeodesicSpace S>
double infdist(const S& space, const PointOf<S>& x, const PointSet<PointOf<S>>& set) {
  double best = kInf;
  for (const auto& y : set.points()) best = std::min(best, space.distance(x, y));
  return best;
}

/// Indices of all members of `set` within `tol` of the infimum distance to `x`.
template <GeodesicSpace S>
std::vector<std::size_t> proj_indices(const S& space, const PointOf<S>& x,
                                      const PointSet<PointOf<S>>& set, double tol) {
  if (!(tol >= 0.0)) throw Error("proj_set: tol must be >= 0");
  std::vector<double> dist(set.size());
  double best = kInf;
  for (std::size_t i = 0; i < set.size(); ++i) {
    dist[i] = space.distance(x, set[i]);
    best = std::min(best, dist[i]);
  }
  std::vector<std::size_t> out;
  const double cut = best + std::max(tol, kTolerance);
  for (std::size_t i = 0; i < set.size(); ++i)
    if (dist[i] <= cut) out.push_back(i);
  return out;
}

/// Every near-minimizer of the distance to `x` (ties are kept, never broken).
template <GeodesicSpace S>
PointSet<PointOf<S>> proj_set(const S& space, const PointOf<S>& x, const PointSet<PointOf<S>>& set,
                              double tol) {
  std::vector<PointOf<S>> pts;
  for (std::size_t i : proj_indices(space, x, set, tol)) pts.push_back(set[i]);
  return PointSet<PointOf<S>>(std::move(pts), set.resolution());
}

/// max over a in A of infdist(a, B). Exact; scans B outward from the previous
/// argmin and stops early once a point closer than the running maximum is seen.
template <GeodesicSpace S>
double directed_hausdorff(const S& space, const PointSet<PointOf<S>>& a, const PointSet<PointOf<S>>& b) {
  const std::size_t nb = b.size();
  double cmax = 0.0;
  std::size_t hint = 0;
  for (const auto& p : a.points()) {
    double cmin = kInf;
    std::size_t arg = hint;
    for (std::size_t k = 0; k < nb; ++k) {
      // hint, hint+1, hint-1, hint+2, ...
      const std::size_t step = (k + 1) / 2;
      std::size_t j;
      if (k % 2 == 1) {
        j = (hint + step) % nb;
      } else {
        j = (hint + nb - (step % nb)) % nb;
      }
      const double d = space.distance(p, b[j]);
      if (d < cmin) {
        cmin = d;
        arg = j;
        if (cmin < cmax) break;
      }
    }
    hint = arg;
    cmax = std::max(cmax, cmin);
  }
  return cmax;
}

template <GeodesicSpace S>
double hausdorff_distance(const S& space, const PointSet<PointOf<S>>& a, const PointSet<PointOf<S>>& b) {
  return std::max(directed_hausdorff(space, a, b), directed_hausdorff(space, b, a));
}

/// Spacing used to discretize continuous subsets when none is given.
inline double default_resolution(double delta, double length) {
  const double by_length = length / 1000.0;
  if (delta > 0.0) return std::min(delta / 10.0, by_length);
  return by_length;
}

/// Evenly spaced points on the chosen geodesic from p to q, both endpoints
/// included, consecutive spacing at most `resolution`.
template <GeodesicSpace S>
PointSet<PointOf<S>> discretize_geodesic(const S& space, const PointOf<S>& p, const PointOf<S>& q,
                                          double resolution) {
  const double len = space.distance(p, q);
  if (len == 0.0) return PointSet<PointOf<S>>({p}, 0.0);
  if (!(resolution > 0.0)) throw Error("discretize_geodesic: resolution must be > 0");
  const auto segments = static_cast<std::size_t>(std::ceil(len / resolution - 1e-12));
  const std::size_t n = std::max<std::size_t>(segments, 1);
  std::vector<PointOf<S>> pts;
  pts.reserve(n + 1);
  pts.push_back(p);
  for (std::size_t i = 1; i < n; ++i)
    pts.push_back(space.geodesic_point(p, q, len * static_cast<double>(i) / static_cast<double>(n)));
  pts.push_back(q);
  return PointSet<PointOf<S>>(std::move(pts), len / static_cast<double>(n));
}

/// Sampled estimate of the least K such that the chosen geodesics between members
/// of `set` stay within K of `set`. Enumerates all pairs when there are at most
/// `pair_samples` of them; otherwise draws pairs from `seed`. The geodesic is
/// probed at `t_samples` interior points spaced evenly (odd counts hit the midpoint).
template <GeodesicSpace S>
double quasiconvexity_defect(const S& space, const PointSet<PointOf<S>>& set, std::size_t pair_samples,
                             std::size_t t_samples, std::uint64_t seed) {
  if (pair_samples == 0 || t_samples == 0) throw Error("quasiconvexity_defect: counts must be >= 1");
  const std::size_t n = set.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (n * (n - 1) / 2 <= pair_samples) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  } else {
    Rng rng(seed);
    while (pairs.size() < pair_samples) {
      const std::size_t i = uniform_index(rng, n);
      const std::size_t j = uniform_index(rng, n);
      if (i != j) pairs.emplace_back(i, j);
    }
  }
  double defect = 0.0;
  for (const auto& [i, j] : pairs) {
    const double len = space.distance(set[i], set[j]);
    if (len == 0.0) continue;
    for (std::size_t k = 1; k <= t_samples; ++k) {
      const double t = len * static_cast<double>(k) / static_cast<double>(t_samples + 1);
      defect = std::max(defect, infdist(space, space.geodesic_point(set[i], set[j], t), set));
    }
  }
  return defect;
}

}  // namespace morse
