#pragma once

// The constant chain behind HD(Q, G) <= k lambda^2 (C + delta) in the
// simplified induction argument, in units of delta:
//
//   L = l delta, D = d delta
//   K0 = k0 lambda^2 (C + delta),  k0 = max(3d + 2l, 5, l)
//   K2 = ln2 / (60 delta lambda)
//   K1 = (L + 4 delta)/(L - 74 delta) * 4 sqrt2 lambda / K2
//      = k1 lambda^2 delta,        k1 = (l + 4)/(l - 74) * 240 sqrt2 / ln2
//   k  = k0 + k1 + 1
//
// The chain is sound only where l > 79, d >= l, 2d - 20 > l - 8 and d > 16.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "morse/common.hpp"

namespace morse::certificate {

struct Params {
  double l = 100.0;  // L / delta
  double d = 100.0;  // D / delta
};

struct NamedMargin {
  std::string name;
  double value = 0.0;
  bool strict = true;  // valid iff value > 0 (strict) or value >= 0

  bool holds() const { return strict ? value > 0.0 : value >= 0.0; }
};

struct Result {
  double k0 = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;  // K2 * delta * lambda
  double k_total = kInf;
  std::vector<NamedMargin> margins;

  bool valid() const {
    return std::all_of(margins.begin(), margins.end(), [](const NamedMargin& m) { return m.holds(); });
  }
};

/// 240 sqrt2 / ln2: the limit of k1 as l grows.
inline double k1_limit() { return 240.0 * std::numbers::sqrt2 / std::numbers::ln2; }

inline double k0_coeff(const Params& p) { return std::max({3.0 * p.d + 2.0 * p.l, 5.0, p.l}); }

inline double k2_value(double delta, double lambda) {
  if (!(delta > 0.0)) throw PreconditionError("k2_value: delta must be > 0");
  if (!(lambda >= 1.0)) throw PreconditionError("k2_value: lambda must be >= 1");
  return std::numbers::ln2 / (60.0 * delta * lambda);
}

/// +inf at and below the pole l = 74.
inline double k1_coeff(const Params& p) {
  if (!(p.l > 74.0)) return kInf;
  return (p.l + 4.0) / (p.l - 74.0) * 4.0 * std::numbers::sqrt2 * 60.0 / std::numbers::ln2;
}

inline std::vector<NamedMargin> validity_margins(const Params& p) {
  return {
      {"projection_window", p.l - 79.0, true},            // L - 50 delta > 29 delta
      {"d_dominates_l", p.d - p.l, false},                 // L + C <= D + C <= d^-
      {"induction_growth", (2.0 * p.d - 20.0) - (p.l - 8.0), true},  // 2 * 2^k d^- - 20 delta >= L - 8 delta
      {"halving", p.d - 16.0, true},                       // 2^k d^- - 8 delta - C/2 >= 2^k d^- / 2
  };
}

inline Result morse_constant(const Params& p) {
  Result r;
  r.k0 = k0_coeff(p);
  r.k1 = k1_coeff(p);
  r.k2 = std::numbers::ln2 / 60.0;
  r.margins = validity_margins(p);
  if (p.l > 0.0 && p.d > 0.0 && r.valid() && std::isfinite(r.k1)) r.k_total = r.k0 + r.k1 + 1.0;
  return r;
}

/// Coefficient after first replacing an arbitrary (lambda, C)-quasi-geodesic by
/// its (lambda, 17C) Lipschitz approximation at uniform distance 8C:
/// k lambda^2 (17C + delta) + 8C <= (17k + 8) lambda^2 (C + delta).
inline double with_lipschitz_reduction(double k) { return 17.0 * k + 8.0; }

/// | K1 (1 - e^{-K2 (m - x)}) + K1 (e^{-K2 (m - x)} - e^{-K2 (b - a)}) - K1 (1 - e^{-K2 (b - a)}) |
inline double telescoping_check(double K1, double K2, double a, double x, double m, double b) {
  if (!(a <= x && x <= m && m <= b)) throw PreconditionError("telescoping_check: needs a <= x <= m <= b");
  if (!(K2 > 0.0)) throw PreconditionError("telescoping_check: K2 must be > 0");
  const double inner = std::exp(-K2 * (m - x));
  const double outer = std::exp(-K2 * (b - a));
  return std::abs(K1 * (1.0 - inner) + K1 * (inner - outer) - K1 * (1.0 - outer));
}

/// The exponent d' ln2 / (10 delta) against (6 lambda d') ln2 / (60 delta lambda),
/// which is what K2 is evaluated at after bounding m+ - v by 6 lambda d'. Returns
/// the larger of the absolute exponent difference and the relative difference
/// of 4 sqrt2 lambda span e^{-exponent} under the two exponents.
inline double lemma23_exponent_check(double d_prime, double delta, double lambda, double span) {
  if (!(d_prime > 0.0)) throw PreconditionError("lemma23_exponent_check: d' must be > 0");
  if (!(delta > 0.0) || !(lambda >= 1.0)) throw PreconditionError("lemma23_exponent_check: needs delta > 0, lambda >= 1");
  const double direct = d_prime * std::numbers::ln2 / (10.0 * delta);
  const double via_k2 = (6.0 * lambda * d_prime) * std::numbers::ln2 / (60.0 * delta * lambda);
  const double scale = 4.0 * std::numbers::sqrt2 * lambda * span;
  const double lhs = scale * std::exp(-direct);
  const double rhs = scale * std::exp(-via_k2);
  const double rel = lhs > 0.0 ? std::abs(lhs - rhs) / lhs : 0.0;
  return std::max(std::abs(direct - via_k2), rel);
}

struct GridSpec {
  double l_min = 79.0;
  double l_max = 400.0;
  double d_min = 79.0;
  double d_max = 400.0;
  std::size_t l_steps = 322;  // grid points per axis, inclusive of both ends
  std::size_t d_steps = 322;
};

struct Optimum {
  Params params;
  double k = kInf;
  std::size_t evaluations = 0;
};

/// Grid search over (l, d) followed by a pattern search whose step is halved
/// on every unsuccessful sweep. Directions include the diagonal (1, 1) so the
/// search can travel along the d = l ridge where the optimum sits. Ties go to
/// the lexicographically smallest (l, d).
inline Optimum optimize_constant(const GridSpec& grid, std::size_t refine_steps = 200) {
  if (grid.l_steps == 0 || grid.d_steps == 0) throw Error("optimize_constant: grid needs at least one point per axis");
  if (!(grid.l_min <= grid.l_max) || !(grid.d_min <= grid.d_max)) throw Error("optimize_constant: empty grid range");
  auto axis = [](double lo, double hi, std::size_t n, std::size_t i) {
    return n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  Optimum best;
  auto consider = [&](Params p) {
    ++best.evaluations;
    const double k = morse_constant(p).k_total;
    const bool better = k < best.k || (k == best.k && std::isfinite(k) &&
                                       std::pair(p.l, p.d) < std::pair(best.params.l, best.params.d));
    if (better) {
      best.k = k;
      best.params = p;
    }
    return better;
  };
  for (std::size_t i = 0; i < grid.l_steps; ++i)
    for (std::size_t j = 0; j < grid.d_steps; ++j)
      consider({axis(grid.l_min, grid.l_max, grid.l_steps, i), axis(grid.d_min, grid.d_max, grid.d_steps, j)});
  if (!std::isfinite(best.k)) throw Error("optimize_constant: no valid (l, d) in the grid");

  const auto in_box = [&](const Params& p) {
    return p.l >= grid.l_min && p.l <= grid.l_max && p.d >= grid.d_min && p.d <= grid.d_max;
  };
  constexpr std::array<std::pair<double, double>, 8> kDirections{
      {{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}, {1, -1}, {-1, 1}}};
  double step_l = grid.l_steps > 1 ? (grid.l_max - grid.l_min) / static_cast<double>(grid.l_steps - 1) : 0.0;
  double step_d = grid.d_steps > 1 ? (grid.d_max - grid.d_min) / static_cast<double>(grid.d_steps - 1) : 0.0;
  double step = std::max(step_l, step_d);
  for (std::size_t it = 0; it < refine_steps && step > 1e-12; ++it) {
    bool moved = false;
    for (const auto& [dl, dd] : kDirections) {
      const Params cand{best.params.l + dl * step, best.params.d + dd * step};
      if (in_box(cand) && consider(cand)) moved = true;
    }
    if (!moved) step *= 0.5;
  }
  return best;
}

}  // namespace morse::certificate
