#pragma once

// Checkers for the closest-point projection inequalities on K-quasiconvex
// targets: projection gaps along a path, linear contraction, and exponential
// contraction for paths staying far from the target.
//
// Every checker returns a signed margin (right-hand side minus left-hand side)
// together with the discretization slack. The target Y is a finite sample with
// covering radius Y.resolution()/2, so it is (K + resolution/2)-quasiconvex;
// slack is the increase of the right-hand side under that substitution. A
// negative margin within slack is inconclusive, never a violation.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "morse/common.hpp"
#include "morse/metric_core.hpp"
#include "morse/quasi_geodesic.hpp"

namespace morse {

struct LemmaConfig {
  double K = 0.0;      // quasiconvexity constant of the target
  double delta = 0.0;  // hyperbolicity constant used; 0 is allowed for trees
  double tol = 0.0;    // proj_set tolerance

  void validate() const {
    if (!(K >= 0.0)) throw PreconditionError("LemmaConfig: K must be >= 0");
    if (!(delta >= 0.0)) throw PreconditionError("LemmaConfig: delta must be >= 0");
    if (!(tol >= 0.0)) throw PreconditionError("LemmaConfig: tol must be >= 0");
  }
};

enum class Verdict { ok, inconclusive, violation };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::ok: return "ok";
    case Verdict::inconclusive: return "inconclusive";
    case Verdict::violation: return "violation";
  }
  return "unknown";
}

inline Verdict classify(double margin, double slack) {
  if (margin >= -kTolerance) return Verdict::ok;
  if (margin >= -slack - kTolerance) return Verdict::inconclusive;
  return Verdict::violation;
}

struct LemmaMargin {
  double margin = 0.0;
  double slack = 0.0;
  Verdict verdict = Verdict::ok;
};

inline LemmaMargin make_margin(double margin, double slack) { return {margin, slack, classify(margin, slack)}; }

struct CrossingResult {
  std::size_t index = 0;
  double t = 0.0;
  double projection_distance = 0.0;  // d(p(t_0), p(t))
  double window_lo = 0.0;
  double window_hi = 0.0;
  LemmaMargin margin;
};

/// Finds a sample whose projection lies at distance in
/// [d_target - 4 delta - 2K, d_target] from the projection of the first sample,
/// with every earlier projection within d_target.
///
/// The margin is (best projection distance over the prefix that stays within
/// d_target) minus the window's lower end; slack also covers the largest
/// step between consecutive samples since the path is only known at samples.
template <GeodesicSpace S>
CrossingResult find_projection_crossing(const S& space, const SampledPath<PointOf<S>>& path,
                                        const PointSet<PointOf<S>>& target, const LemmaConfig& cfg,
                                        double d_target) {
  cfg.validate();
  const auto& pts = path.points();
  std::vector<double> reach(pts.size());
  const auto& p0 = target[proj_indices(space, pts.front(), target, cfg.tol).front()];
  for (std::size_t i = 0; i < pts.size(); ++i)
    reach[i] = space.distance(p0, target[proj_indices(space, pts[i], target, cfg.tol).front()]);

  const double lo = d_target - 4.0 * cfg.delta - 2.0 * cfg.K;
  if (lo < -kTolerance)
    throw PreconditionError("find_projection_crossing: d_target below 4 delta + 2K");
  if (d_target > reach.back() + kTolerance)
    throw PreconditionError("find_projection_crossing: d_target exceeds the projection span d(p(t_0), p(t_n))");

  CrossingResult r;
  r.window_lo = lo;
  r.window_hi = d_target;
  bool found = false;
  std::size_t best = 0;
  for (std::size_t i = 0; i < reach.size() && reach[i] <= d_target + kTolerance; ++i) {
    if (reach[i] > reach[best]) best = i;
    if (!found && reach[i] >= lo - kTolerance) {
      found = true;
      r.index = i;
    }
  }
  if (!found) r.index = best;
  r.t = path.params()[r.index];
  r.projection_distance = reach[r.index];
  const double slack = 2.0 * target.resolution() + max_point_step(space, path);
  r.margin = make_margin(reach[best] - lo, slack);
  return r;
}

/// d(p_x, p_y) <= max(5 delta + 2K, d(x, y) - d(x, p_x) - d(y, p_y) + 10 delta + 4K),
/// worst case over all projection representatives.
template <GeodesicSpace S>
LemmaMargin lemma24_margin(const S& space, const PointSet<PointOf<S>>& target, const LemmaConfig& cfg,
                           const PointOf<S>& x, const PointOf<S>& y) {
  cfg.validate();
  const auto px = proj_indices(space, x, target, cfg.tol);
  const auto py = proj_indices(space, y, target, cfg.tol);
  const double dxy = space.distance(x, y);
  double worst = kInf;
  for (std::size_t i : px)
    for (std::size_t j : py) {
      const double rhs = std::max(5.0 * cfg.delta + 2.0 * cfg.K,
                                  dxy - space.distance(x, target[i]) - space.distance(y, target[j]) +
                                      10.0 * cfg.delta + 4.0 * cfg.K);
      worst = std::min(worst, rhs - space.distance(target[i], target[j]));
    }
  return make_margin(worst, 2.0 * target.resolution());
}

namespace detail {

// exp(-x ln 2 / (5 delta)), continued to delta = 0 by its limit.
inline double contraction_factor(double x, double delta) {
  if (delta > 0.0) return std::exp(-x * std::numbers::ln2 / (5.0 * delta));
  return x > 0.0 ? 0.0 : 1.0;
}

inline double lemma25_rhs(double K, double delta, double lambda, double C, double length, double D) {
  return 2.0 * K + 8.0 * delta +
         std::max(5.0 * delta, 4.0 * std::numbers::sqrt2 * lambda * length * contraction_factor(D - K - C / 2.0, delta));
}

}  // namespace detail

/// Exponential contraction: for a path satisfying d(f(s), f(t)) <= lambda |s - t| + C
/// and staying at distance >= D from the target, with D >= 15/2 delta + K + C/2,
/// d(p_a, p_b) <= 2K + 8 delta + max(5 delta, 4 sqrt2 lambda (b - a) exp(-(D - K - C/2) ln2 / (5 delta))).
///
/// Throws PreconditionError naming the first failed hypothesis. Slack accounts
/// for the discretized target (K + res/2) and for the sampled path
/// (C + lambda * largest parameter step).
template <GeodesicSpace S>
LemmaMargin lemma25_margin(const S& space, const PointSet<PointOf<S>>& target, const LemmaConfig& cfg,
                           const SampledPath<PointOf<S>>& path, const QIParams& qi, double D) {
  cfg.validate();
  qi.validate();
  const auto& pts = path.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double d = infdist(space, pts[i], target);
    if (d < D - kTolerance)
      throw PreconditionError("lemma25: sample " + std::to_string(i) + " is at distance " + std::to_string(d) +
                              " < D = " + std::to_string(D) + " from the target");
  }
  if (D < 7.5 * cfg.delta + cfg.K + qi.C / 2.0 - kTolerance)
    throw PreconditionError("lemma25: D below 15/2 delta + K + C/2");
  if (qi_upper_defect(space, path, qi.lambda) > qi.C + kTolerance)
    throw PreconditionError("lemma25: path violates d(f(s), f(t)) <= lambda |s - t| + C");

  double lhs = 0.0;
  for (std::size_t i : proj_indices(space, pts.front(), target, cfg.tol))
    for (std::size_t j : proj_indices(space, pts.back(), target, cfg.tol))
      lhs = std::max(lhs, space.distance(target[i], target[j]));
  const double rhs = detail::lemma25_rhs(cfg.K, cfg.delta, qi.lambda, qi.C, path.span(), D);
  const double rhs_eff = detail::lemma25_rhs(cfg.K + 0.5 * target.resolution(), cfg.delta, qi.lambda,
                                             qi.C + qi.lambda * path.max_param_step(), path.span(), D);
  return make_margin(rhs - lhs, std::max(0.0, rhs_eff - rhs));
}

}  // namespace morse
