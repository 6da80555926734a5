#pragma once

// Sampled quasi-geodesics: the (lambda, C) inequalities, honest parameter
// fitting, random instance generators and the Lipschitz approximation.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "morse/common.hpp"
#include "morse/hyperbolic_plane.hpp"
#include "morse/metric_core.hpp"

namespace morse {

struct QIParams {
  double lambda = 1.0;
  double C = 0.0;

  void validate() const {
    if (!(lambda >= 1.0)) throw PreconditionError("QIParams: lambda must be >= 1");
    if (!(C >= 0.0)) throw PreconditionError("QIParams: C must be >= 0");
  }
};

/// A map from strictly increasing parameters t_0 < ... < t_n to points.
template <class P>
class SampledPath {
 public:
  SampledPath(std::vector<double> params, std::vector<P> points)
      : params_(std::move(params)), points_(std::move(points)) {
    if (params_.size() != points_.size()) throw Error("SampledPath: one point per parameter");
    if (params_.size() < 2) throw Error("SampledPath: needs at least two samples");
    for (std::size_t i = 1; i < params_.size(); ++i)
      if (!(params_[i] > params_[i - 1])) throw Error("SampledPath: parameters must be strictly increasing");
  }

  const std::vector<double>& params() const { return params_; }
  const std::vector<P>& points() const { return points_; }
  std::size_t size() const { return params_.size(); }
  double start() const { return params_.front(); }
  double finish() const { return params_.back(); }
  double span() const { return finish() - start(); }

  double max_param_step() const {
    double h = 0.0;
    for (std::size_t i = 1; i < params_.size(); ++i) h = std::max(h, params_[i] - params_[i - 1]);
    return h;
  }

  PointSet<P> image(double resolution = 0.0) const { return PointSet<P>(points_, resolution); }

 private:
  std::vector<double> params_;
  std::vector<P> points_;
};

/// Largest distance between consecutive samples.
template <GeodesicSpace S>
double max_point_step(const S& space, const SampledPath<PointOf<S>>& path) {
  double h = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) h = std::max(h, space.distance(path.points()[i - 1], path.points()[i]));
  return h;
}

/// (|t_i - t_j|, d(f(t_i), f(t_j))) over all pairs i < j; reused across lambdas.
struct PairTable {
  std::vector<double> dt;
  std::vector<double> dist;
  // Nearest-sample cells of the parameter interval: for each pair, the least
  // and largest |s - t| with s in cell i, t in cell j; and the widest cell.
  std::vector<double> gap_min;
  std::vector<double> gap_max;
  double widest_cell = 0.0;
};

template <GeodesicSpace S>
PairTable pair_table(const S& space, const SampledPath<PointOf<S>>& path) {
  PairTable table;
  const std::size_t n = path.size();
  table.dt.reserve(n * (n - 1) / 2);
  table.dist.reserve(n * (n - 1) / 2);
  const auto& t = path.params();
  std::vector<double> lo(n), hi(n);
  for (std::size_t i = 0; i < n; ++i) {
    lo[i] = i == 0 ? t[0] : 0.5 * (t[i - 1] + t[i]);
    hi[i] = i + 1 == n ? t[n - 1] : 0.5 * (t[i] + t[i + 1]);
    table.widest_cell = std::max(table.widest_cell, hi[i] - lo[i]);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      table.dt.push_back(t[j] - t[i]);
      table.dist.push_back(space.distance(path.points()[i], path.points()[j]));
      table.gap_min.push_back(lo[j] - hi[i]);
      table.gap_max.push_back(hi[j] - lo[i]);
    }
  return table;
}

inline double qi_defect(const PairTable& table, double lambda) {
  double c = 0.0;
  for (std::size_t k = 0; k < table.dt.size(); ++k) {
    c = std::max(c, table.dist[k] - lambda * table.dt[k]);
    c = std::max(c, table.dt[k] / lambda - table.dist[k]);
  }
  return c;
}

inline double qi_upper_defect(const PairTable& table, double lambda) {
  double c = 0.0;
  for (std::size_t k = 0; k < table.dt.size(); ++k) c = std::max(c, table.dist[k] - lambda * table.dt[k]);
  return c;
}

/// Smallest C >= 0 for which the path is a (lambda, C)-quasi-isometry on its samples.
template <GeodesicSpace S>
double qi_defect(const S& space, const SampledPath<PointOf<S>>& path, double lambda) {
  if (!(lambda >= 1.0)) throw PreconditionError("qi_defect: lambda must be >= 1");
  return qi_defect(pair_table(space, path), lambda);
}

/// Smallest C >= 0 for the upper inequality d <= lambda |dt| + C alone.
template <GeodesicSpace S>
double qi_upper_defect(const S& space, const SampledPath<PointOf<S>>& path, double lambda) {
  return qi_upper_defect(pair_table(space, path), lambda);
}

/// Exact defect of the step map sending s in [t_0, t_n] to the sample with the
/// nearest parameter. That map is defined on the whole interval and its image
/// is exactly the sample set.
inline double interval_qi_defect(const PairTable& table, double lambda) {
  double c = table.widest_cell / lambda;  // s, t in one cell map to one point
  for (std::size_t k = 0; k < table.dt.size(); ++k) {
    c = std::max(c, table.dist[k] - lambda * table.gap_min[k]);
    c = std::max(c, table.gap_max[k] / lambda - table.dist[k]);
  }
  return c;
}

template <GeodesicSpace S>
double interval_qi_defect(const S& space, const SampledPath<PointOf<S>>& path, double lambda) {
  if (!(lambda >= 1.0)) throw PreconditionError("interval_qi_defect: lambda must be >= 1");
  return interval_qi_defect(pair_table(space, path), lambda);
}

/// Honest (lambda, C) for a path: over a geometric lambda grid, the pair with
/// C = interval_qi_defect(lambda) minimizing lambda^2 (C + delta). Sample-only
/// defects are not used here: with distinct samples they can reach 0 at a huge
/// lambda even when the path backtracks.
inline QIParams fit_qi_params(const PairTable& table, double delta, std::optional<double> fixed_lambda = {}) {
  if (fixed_lambda) return {*fixed_lambda, interval_qi_defect(table, *fixed_lambda)};
  double hi = 1.0;
  for (std::size_t k = 0; k < table.dt.size(); ++k) hi = std::max(hi, table.dt[k] / std::max(table.dist[k], 1e-9));
  hi = std::min(hi, 1e3);
  constexpr int kSteps = 240;
  QIParams best{1.0, interval_qi_defect(table, 1.0)};
  double best_score = best.C + delta;
  for (int k = 1; k <= kSteps; ++k) {
    const double lambda = std::pow(hi, static_cast<double>(k) / kSteps);
    const double c = interval_qi_defect(table, lambda);
    const double score = lambda * lambda * (c + delta);
    if (score < best_score) {
      best_score = score;
      best = {lambda, c};
    }
  }
  return best;
}

template <GeodesicSpace S>
QIParams fit_qi_params(const S& space, const SampledPath<PointOf<S>>& path, double delta,
                       std::optional<double> fixed_lambda = {}) {
  return fit_qi_params(pair_table(space, path), delta, fixed_lambda);
}

/// Parameters = cumulative distance along consecutive samples.
template <GeodesicSpace S>
SampledPath<PointOf<S>> arclength_path(const S& space, std::vector<PointOf<S>> points) {
  std::vector<double> params(points.size(), 0.0);
  for (std::size_t i = 1; i < points.size(); ++i)
    params[i] = params[i - 1] + std::max(space.distance(points[i - 1], points[i]), 1e-12);
  return SampledPath<PointOf<S>>(std::move(params), std::move(points));
}

/// A generated instance together with the (lambda, C) measured on it.
template <class P>
struct GeneratedPath {
  SampledPath<P> path;
  QIParams qi;
};

struct FitOptions {
  double delta = 0.0;                  // enters the lambda^2 (C + delta) objective
  std::optional<double> fixed_lambda;  // measure C at this lambda instead of fitting
};

/// Geodesic from p to q sampled at n points, each displaced towards a random
/// target by a smooth bump profile of height at most `amplitude`. Endpoints stay at p and q.
template <GeodesicSpace S>
GeneratedPath<PointOf<S>> generate_perturbed_geodesic(const S& space, const PointOf<S>& p, const PointOf<S>& q,
                                                      double amplitude, std::size_t n_samples, std::uint64_t seed,
                                                      const FitOptions& fit = {}) {
  if (!(amplitude >= 0.0)) throw PreconditionError("generate_perturbed_geodesic: amplitude must be >= 0");
  if (n_samples < 2) throw PreconditionError("generate_perturbed_geodesic: needs at least two samples");
  const double len = space.distance(p, q);
  if (len == 0.0) throw PreconditionError("generate_perturbed_geodesic: endpoints coincide");
  Rng rng(seed);
  const std::size_t bumps = std::max<std::size_t>(1, n_samples / 24);
  std::vector<double> heights(bumps);
  std::vector<PointOf<S>> targets;
  for (std::size_t k = 0; k < bumps; ++k) {
    heights[k] = uniform(rng, 0.0, amplitude);
    targets.push_back(space.sample_point(rng));
  }
  std::vector<PointOf<S>> points;
  points.reserve(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double s = len * static_cast<double>(i) / static_cast<double>(n_samples - 1);
    auto base = space.geodesic_point(p, q, s);
    const double pos = s / len * static_cast<double>(bumps);
    const std::size_t k = std::min(bumps - 1, static_cast<std::size_t>(pos));
    const double a = heights[k] * std::sin(std::numbers::pi * (pos - static_cast<double>(k)));
    if (a <= 0.0 || i == 0 || i + 1 == n_samples) {
      points.push_back(i == 0 ? p : (i + 1 == n_samples ? q : base));
      continue;
    }
    const double reach = space.distance(base, targets[k]);
    points.push_back(reach > 0.0 ? space.geodesic_point(base, targets[k], std::min(a, reach)) : base);
  }
  auto path = arclength_path(space, std::move(points));
  const auto qi = fit_qi_params(space, path, fit.delta, fit.fixed_lambda);
  return {std::move(path), qi};
}

namespace detail {

template <class S>
concept HasPerpendicularOffset = requires(const S& s, const PointOf<S>& p, int side, double h) {
  { s.perpendicular_offset(p, p, p, side, h) } -> std::same_as<PointOf<S>>;
};

// A point roughly at height h above the geodesic [p, q], near `base` on it.
// Height is measured by the Gromov product (p, q)_x, which is exact in trees.
template <GeodesicSpace S>
PointOf<S> excursion(const S& space, const PointOf<S>& p, const PointOf<S>& q, const PointOf<S>& base, int side,
                     double h, Rng& rng) {
  if (h <= 0.0) return base;
  if constexpr (HasPerpendicularOffset<S>) {
    return space.perpendicular_offset(p, q, base, side, h);
  } else {
    auto height = [&](const PointOf<S>& x) { return gromov_product(space, p, q, x); };
    // Among candidates reaching height h, the apex closest to base.
    constexpr int kCandidates = 48;
    std::optional<PointOf<S>> apex, tallest;
    double apex_dist = kInf, tallest_height = -1.0;
    for (int c = 0; c < kCandidates; ++c) {
      const auto target = space.sample_point(rng);
      const double reach = space.distance(base, target);
      if (reach == 0.0) continue;
      if (height(target) >= h) {
        double lo = 0.0, hi = reach;
        for (int it = 0; it < 80; ++it) {
          const double mid = 0.5 * (lo + hi);
          (height(space.geodesic_point(base, target, mid)) >= h ? hi : lo) = mid;
        }
        if (hi < apex_dist) {
          apex_dist = hi;
          apex = space.geodesic_point(base, target, hi);
        }
      } else if (height(target) > tallest_height) {
        tallest_height = height(target);
        tallest = target;
      }
    }
    if (apex) return *apex;
    return tallest ? *tallest : base;
  }
}

template <GeodesicSpace S>
void append_leg(const S& space, const PointOf<S>& a, const PointOf<S>& b, double step, std::vector<PointOf<S>>& out) {
  const double len = space.distance(a, b);
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / step)));
  for (std::size_t j = 1; j < n; ++j)
    out.push_back(space.geodesic_point(a, b, len * static_cast<double>(j) / static_cast<double>(n)));
  out.push_back(b);
}

}  // namespace detail

/// Zig-zag from p to q: `tooth_count` excursions of height `tooth_height`
/// (alternating sides where the space has them), each leg sampled geodesically
/// so that consecutive samples are at most `step` apart.
template <GeodesicSpace S>
GeneratedPath<PointOf<S>> generate_sawtooth(const S& space, const PointOf<S>& p, const PointOf<S>& q,
                                            double tooth_height, std::size_t tooth_count, std::uint64_t seed,
                                            double step, const FitOptions& fit = {}) {
  if (!(tooth_height >= 0.0)) throw PreconditionError("generate_sawtooth: tooth height must be >= 0");
  if (tooth_count == 0) throw PreconditionError("generate_sawtooth: needs at least one tooth");
  if (!(step > 0.0)) throw PreconditionError("generate_sawtooth: step must be > 0");
  const double len = space.distance(p, q);
  if (len == 0.0) throw PreconditionError("generate_sawtooth: endpoints coincide");
  Rng rng(seed);
  std::vector<PointOf<S>> points{p};
  auto prev = p;
  for (std::size_t k = 0; k < tooth_count; ++k) {
    const double s0 = len * static_cast<double>(k) / static_cast<double>(tooth_count);
    const double s1 = len * static_cast<double>(k + 1) / static_cast<double>(tooth_count);
    const auto mid = space.geodesic_point(p, q, 0.5 * (s0 + s1));
    const auto apex = detail::excursion(space, p, q, mid, k % 2 == 0 ? 1 : -1, tooth_height, rng);
    const auto next = k + 1 == tooth_count ? q : space.geodesic_point(p, q, s1);
    detail::append_leg(space, prev, apex, step, points);
    detail::append_leg(space, apex, next, step, points);
    prev = next;
  }
  // Legs may end where they started (zero height); drop exact repeats.
  std::vector<PointOf<S>> cleaned{points.front()};
  for (std::size_t i = 1; i < points.size(); ++i)
    if (space.distance(cleaned.back(), points[i]) > 0.0) cleaned.push_back(points[i]);
  auto path = arclength_path(space, std::move(cleaned));
  const auto qi = fit_qi_params(space, path, fit.delta, fit.fixed_lambda);
  return {std::move(path), qi};
}

/// Piecewise-geodesic approximation of a sampled (lambda, C)-quasi-geodesic.
///
/// Anchors are samples at least s = (Delta-1) C / lambda apart in parameter;
/// between anchors the output moves at constant speed along the geodesic, so
/// every segment has speed <= lambda + C/s = Delta/(Delta-1) lambda. Output
/// parameters equal the input's; endpoints are kept.
template <GeodesicSpace S>
SampledPath<PointOf<S>> lipschitz_approximate(const S& space, const SampledPath<PointOf<S>>& path,
                                              const QIParams& qi, double Delta) {
  qi.validate();
  if (!(Delta > 1.0)) throw PreconditionError("lipschitz_approximate: Delta must be > 1");
  if (qi.C == 0.0) return path;
  const auto& t = path.params();
  const auto& f = path.points();
  const std::size_t n = path.size();
  const double ends = space.distance(f.front(), f.back());
  if (ends < Delta * qi.C)
    throw PreconditionError("lipschitz_approximate: endpoints are " + std::to_string(ends) +
                            " apart, less than Delta * C = " + std::to_string(Delta * qi.C));
  if (qi_defect(space, path, qi.lambda) > qi.C + kTolerance)
    throw PreconditionError("lipschitz_approximate: input is not a (lambda, C)-quasi-geodesic");

  const double spacing = std::min((Delta - 1.0) * qi.C / qi.lambda, path.span());
  std::vector<std::size_t> anchors{0};
  for (std::size_t j = 1; j < n; ++j)
    if (t[j] - t[anchors.back()] >= spacing) anchors.push_back(j);
  if (anchors.back() != n - 1) {
    if (anchors.size() > 1) anchors.back() = n - 1;
    else anchors.push_back(n - 1);
  }

  std::vector<PointOf<S>> out(f);
  for (std::size_t k = 0; k + 1 < anchors.size(); ++k) {
    const std::size_t a = anchors[k], b = anchors[k + 1];
    const double chord = space.distance(f[a], f[b]);
    for (std::size_t i = a + 1; i < b; ++i)
      out[i] = space.geodesic_point(f[a], f[b], chord * (t[i] - t[a]) / (t[b] - t[a]));
  }
  return SampledPath<PointOf<S>>(t, std::move(out));
}

/// Measured constants of a Lipschitz approximation against its input.
struct LipschitzReport {
  double sup_distance = 0.0;    // max_i d(f(t_i), g(t_i))
  double lipschitz_ratio = 0.0; // max_{i<j} d(g_i, g_j) / (t_j - t_i)
  double qi_constant = 0.0;     // qi_defect(g, lambda)
};

template <GeodesicSpace S>
LipschitzReport measure_lipschitz_approximation(const S& space, const SampledPath<PointOf<S>>& input,
                                                const SampledPath<PointOf<S>>& output, double lambda) {
  LipschitzReport r;
  for (std::size_t i = 0; i < input.size(); ++i)
    r.sup_distance = std::max(r.sup_distance, space.distance(input.points()[i], output.points()[i]));
  const auto table = pair_table(space, output);
  for (std::size_t k = 0; k < table.dt.size(); ++k) r.lipschitz_ratio = std::max(r.lipschitz_ratio, table.dist[k] / table.dt[k]);
  r.qi_constant = qi_defect(table, lambda);
  return r;
}

}  // namespace morse
