#pragma once

// The hyperbolic plane in the hyperboloid model t^2 - x^2 - y^2 = 1, t >= 1.

#include <cmath>
#include <numbers>
#include <optional>

#include "morse/common.hpp"
#include "morse/metric_core.hpp"

namespace morse {

struct H2Point {
  double t = 1.0;
  double x = 0.0;
  double y = 0.0;

  /// Lift of (x, y) to the upper sheet; t is recomputed so the sheet equation is exact.
  static H2Point from_xy(double x, double y) { return {std::sqrt(1.0 + x * x + y * y), x, y}; }

  static H2Point from_half_plane(double u, double v) {
    if (!(v > 0.0)) throw Error("half-plane point must have positive imaginary part");
    const double s = u * u + v * v;
    return from_xy((s - 1.0) / (2.0 * v), u / v);
  }

  /// Inverse of from_half_plane: returns (u, v) with v > 0.
  std::pair<double, double> to_half_plane() const {
    // t - x = 1 / v; computed as (1 + y^2) / (t + x) to avoid cancellation for large x.
    const double t_minus_x = (1.0 + y * y) / (t + x);
    const double v = 1.0 / t_minus_x;
    return {y * v, v};
  }

  bool on_sheet(double tol = kTolerance) const {
    return t >= 1.0 - tol && std::abs(t * t - x * x - y * y - 1.0) <= tol * std::max(1.0, t * t);
  }

  friend bool operator==(const H2Point&, const H2Point&) = default;
};

/// arcosh of the negated Minkowski product, evaluated as 2 asinh(|p - q|_M / 2)
/// with the timelike difference eliminated so nearby points far from the
/// origin keep full relative precision.
inline double h2_distance(const H2Point& p, const H2Point& q) {
  const double ax = p.x - q.x;
  const double ay = p.y - q.y;
  if (ax == 0.0 && ay == 0.0) return 0.0;
  const double sx = p.x + q.x;
  const double sy = p.y + q.y;
  const double big_t = p.t + q.t;
  const double s_norm = std::hypot(sx, sy);
  double par = 0.0;
  double perp = std::hypot(ax, ay);
  if (s_norm > 0.0) {
    par = (ax * sx + ay * sy) / s_norm;
    perp = (ax * sy - ay * sx) / s_norm;
  }
  const double r = par / big_t;
  const double denom = (1.0 - r) * (1.0 + r);
  // |p - q|_M^2 = 2 cosh d - 2
  double n = (perp * perp + 4.0 * r * r) / denom;
  if (!(n > 0.0)) n = 0.0;
  return 2.0 * std::asinh(0.5 * std::sqrt(n));
}

/// Point at arclength t from p on the geodesic towards q.
inline H2Point h2_geodesic_point(const H2Point& p, const H2Point& q, double t) {
  const double d = h2_distance(p, q);
  if (d == 0.0) {
    if (t > kTolerance) throw Error("h2_geodesic_point: p == q with t > 0");
    return p;
  }
  if (t <= 0.0) return p;
  if (t >= d) return q;
  const double sd = std::sinh(d);
  const double a = std::sinh(d - t) / sd;
  const double b = std::sinh(t) / sd;
  return H2Point::from_xy(a * p.x + b * q.x, a * p.y + b * q.y);
}

namespace detail {

// Lorentz boost taking the origin (1,0,0) to c, applied to v.
inline H2Point boost_from_origin(const H2Point& c, double vt, double vx, double vy) {
  const double k = 1.0 / (1.0 + c.t);
  const double x = c.x * vt + (1.0 + c.x * c.x * k) * vx + c.x * c.y * k * vy;
  const double y = c.y * vt + c.x * c.y * k * vx + (1.0 + c.y * c.y * k) * vy;
  return H2Point::from_xy(x, y);
}

// Inverse boost (takes c to the origin); returns only the spatial part.
inline std::pair<double, double> boost_to_origin(const H2Point& c, const H2Point& v) {
  const double k = 1.0 / (1.0 + c.t);
  const double x = -c.x * v.t + (1.0 + c.x * c.x * k) * v.x + c.x * c.y * k * v.y;
  const double y = -c.y * v.t + c.x * c.y * k * v.x + (1.0 + c.y * c.y * k) * v.y;
  return {x, y};
}

}  // namespace detail

/// Exponential map at `base`: the point at distance r in direction `angle`
/// (angle measured in the frame obtained by boosting the origin to `base`).
inline H2Point h2_point_at(const H2Point& base, double angle, double r) {
  return detail::boost_from_origin(base, std::cosh(r), std::sinh(r) * std::cos(angle),
                                   std::sinh(r) * std::sin(angle));
}

/// Direction of `target` seen from `base`, in the same frame as h2_point_at.
inline double h2_direction(const H2Point& base, const H2Point& target) {
  const auto [x, y] = detail::boost_to_origin(base, target);
  return std::atan2(y, x);
}

/// H^2 restricted for sampling purposes to a disc of given radius around a center
/// (given in half-plane coordinates). Distances and geodesics are global.
class HyperbolicPlane {
 public:
  using point_type = H2Point;

  explicit HyperbolicPlane(H2Point center = {}, double radius = 3.0, std::optional<double> delta = {})
      : center_(center), radius_(radius), delta_(delta) {
    if (!(radius_ > 0.0)) throw Error("HyperbolicPlane: sampling radius must be > 0");
    if (delta_ && !(*delta_ >= 0.0)) throw Error("HyperbolicPlane: delta must be >= 0");
  }

  static HyperbolicPlane from_half_plane_region(double u, double v, double radius,
                                                std::optional<double> delta = {}) {
    return HyperbolicPlane(H2Point::from_half_plane(u, v), radius, delta);
  }

  SpaceKind kind() const { return SpaceKind::hyperbolic_plane; }
  double distance(const H2Point& p, const H2Point& q) const { return h2_distance(p, q); }
  H2Point geodesic_point(const H2Point& p, const H2Point& q, double t) const {
    return h2_geodesic_point(p, q, t);
  }

  /// Area-uniform sample in the disc of radius `radius()` around `center()`.
  H2Point sample_point(Rng& rng) const {
    const double u = uniform(rng, 0.0, 1.0);
    const double r = std::acosh(1.0 + u * (std::cosh(radius_) - 1.0));
    const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    return h2_point_at(center_, angle, r);
  }

  std::optional<double> delta_hint() const { return delta_; }
  HyperbolicPlane with_delta(double delta) const { return HyperbolicPlane(center_, radius_, delta); }

  const H2Point& center() const { return center_; }
  double radius() const { return radius_; }

  /// Point at distance h from the geodesic through p and q, reached from the
  /// geodesic point `base` perpendicularly; side = +1 or -1.
  H2Point perpendicular_offset(const H2Point& p, const H2Point& q, const H2Point& base, int side,
                               double h) const {
    double along;
    if (h2_distance(base, q) > 1e-12) {
      along = h2_direction(base, q);
    } else {
      along = h2_direction(base, p) + std::numbers::pi;
    }
    return h2_point_at(base, along + side * 0.5 * std::numbers::pi, h);
  }

 private:
  H2Point center_;
  double radius_;
  std::optional<double> delta_;
};

}  // namespace morse
