#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace geotree {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Point a, Point b) = default;
};

inline constexpr Point kOrigin{0.0, 0.0};

constexpr double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Point a, Point b) { return a.x * b.y - a.y * b.x; }
constexpr double norm2(Point a) { return dot(a, a); }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double dist(Point a, Point b) { return norm(a - b); }

/// Unit vector with argument `angle`.
inline Point polar(double radius, double angle) {
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

/// Rotates `p` by `-angle`, i.e. expresses it in a frame whose first axis has argument `angle`.
inline Point rotate_into(Point p, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * p.x + s * p.y, -s * p.x + c * p.y};
}

/// Lexicographic (x, then y) order, used for deterministic tie-breaks.
constexpr bool lex_less(Point a, Point b) {
  return a.x < b.x || (a.x == b.x && a.y < b.y);
}

/// Argument in [0, 2pi).
inline double arg(Point p) {
  double a = std::atan2(p.y, p.x);
  if (a < 0.0) a += 2.0 * std::numbers::pi;
  return a;
}

/// Distance from `p` to the closed segment [a; b].
inline double dist_to_segment(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = norm2(ab);
  if (len2 == 0.0) return dist(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return dist(p, a + t * ab);
}

/// Axis-aligned box [xmin, xmax] x [ymin, ymax].
struct Box {
  double xmin = 0.0, ymin = 0.0, xmax = 0.0, ymax = 0.0;

  constexpr bool contains(Point p) const {
    return p.x >= xmin && p.x <= xmax && p.y >= ymin && p.y <= ymax;
  }
  constexpr bool contains(const Box& b) const {
    return b.xmin >= xmin && b.xmax <= xmax && b.ymin >= ymin && b.ymax <= ymax;
  }
  constexpr bool empty() const { return xmin > xmax || ymin > ymax; }

  static constexpr Box around(Point c, double r) { return {c.x - r, c.y - r, c.x + r, c.y + r}; }
  static Box spanning(Point a, Point b) {
    return {std::min(a.x, b.x), std::min(a.y, b.y), std::max(a.x, b.x), std::max(a.y, b.y)};
  }
  Box expanded(double m) const { return {xmin - m, ymin - m, xmax + m, ymax + m}; }
  Box intersect(const Box& o) const {
    return {std::max(xmin, o.xmin), std::max(ymin, o.ymin), std::min(xmax, o.xmax),
            std::min(ymax, o.ymax)};
  }
  void include(Point p) {
    xmin = std::min(xmin, p.x);
    ymin = std::min(ymin, p.y);
    xmax = std::max(xmax, p.x);
    ymax = std::max(ymax, p.y);
  }
};

/// Box of the rectangle { c + t*u + s*n : t in [t0, t1], s in [-h, h] } where
/// u is a unit vector and n its normal.
inline Box oriented_rect_box(Point c, Point u, double t0, double t1, double h) {
  const Point n{-u.y, u.x};
  Box b{1e300, 1e300, -1e300, -1e300};
  for (double t : {t0, t1})
    for (double s : {-h, h}) b.include(c + t * u + s * n);
  return b;
}

namespace detail {
inline int orientation_sign(Point a, Point b, Point c) {
  const double v = cross(b - a, c - a);
  return (v > 0.0) - (v < 0.0);
}
} // namespace detail

/// True when the open segments (a1; a2) and (b1; b2) share a point.
inline bool open_segments_intersect(Point a1, Point a2, Point b1, Point b2) {
  if (std::max(a1.x, a2.x) < std::min(b1.x, b2.x) || std::max(b1.x, b2.x) < std::min(a1.x, a2.x) ||
      std::max(a1.y, a2.y) < std::min(b1.y, b2.y) || std::max(b1.y, b2.y) < std::min(a1.y, a2.y))
    return false;
  using detail::orientation_sign;
  const int o1 = orientation_sign(a1, a2, b1);
  const int o2 = orientation_sign(a1, a2, b2);
  const int o3 = orientation_sign(b1, b2, a1);
  const int o4 = orientation_sign(b1, b2, a2);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && o2 == 0) {
    // Collinear: compare the open parameter intervals along a.
    const Point d = a2 - a1;
    const double len2 = norm2(d);
    if (len2 == 0.0) return false;
    const double s1 = dot(b1 - a1, d) / len2, s2 = dot(b2 - a1, d) / len2;
    return std::max(0.0, std::min(s1, s2)) < std::min(1.0, std::max(s1, s2));
  }
  return false;
}

/// Signed angular difference a - b wrapped into (-pi, pi].
inline double angle_diff(double a, double b) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double d = std::fmod(a - b, two_pi);
  if (d <= -std::numbers::pi) d += two_pi;
  if (d > std::numbers::pi) d -= two_pi;
  return d;
}

} // namespace geotree
