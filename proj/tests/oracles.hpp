#pragma once

// Independent reference implementations. They share only the Point type with
// the library and favour obviousness over speed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "geotree/geometry.hpp"

namespace oracle {

using geotree::Point;

inline double sq(double v) { return v * v; }
inline double len2(Point p) { return p.x * p.x + p.y * p.y; }

/// Distance from p to the segment [a; b] by clamped projection.
inline double seg_dist(Point p, Point a, Point b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double l2 = vx * vx + vy * vy;
  double t = l2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / l2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * vx), p.y - (a.y + t * vy));
}

inline std::vector<std::size_t> scan_ball(const std::vector<Point>& pts, Point c, double r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (std::hypot(pts[i].x - c.x, pts[i].y - c.y) < r) out.push_back(i);
  return out;
}

/// Closed half-strip apex + (-inf, 0] x [-rho, rho].
inline std::vector<std::size_t> scan_half_strip(const std::vector<Point>& pts, Point apex, double rho) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (pts[i].x <= apex.x && std::abs(pts[i].y - apex.y) <= rho) out.push_back(i);
  return out;
}

/// Open cylinder: closer than rho to [O; x] and of norm below |x|.
inline bool in_cylinder(Point p, Point x, double rho) {
  return len2(p) < len2(x) && seg_dist(p, {0, 0}, x) < rho;
}

/// RPT ancestor by linear scan: largest norm in the cylinder, ties to the
/// lexicographically larger point. nullopt is the root.
inline std::optional<std::size_t> rpt_ancestor(const std::vector<Point>& pts, Point x, double rho) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!in_cylinder(pts[i], x, rho)) continue;
    if (!best) { best = i; continue; }
    const Point b = pts[*best], p = pts[i];
    if (len2(p) > len2(b) || (len2(p) == len2(b) && (p.x > b.x || (p.x == b.x && p.y > b.y)))) best = i;
  }
  return best;
}

/// Forest ancestor by linear scan: largest abscissa among points strictly
/// lexicographically below x inside |y - x.y| <= rho.
inline std::optional<std::size_t> forest_ancestor(const std::vector<Point>& pts, Point x, double rho) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point p = pts[i];
    if (std::abs(p.y - x.y) > rho) continue;
    if (!(p.x < x.x || (p.x == x.x && p.y < x.y))) continue;
    if (!best || p.x > pts[*best].x || (p.x == pts[*best].x && p.y > pts[*best].y)) best = i;
  }
  return best;
}

/// Proper intersection of closed segments [a1; a2] and [b1; b2] that is not
/// a shared endpoint, solved parametrically.
inline bool segments_meet(Point a1, Point a2, Point b1, Point b2) {
  const bool share = a1 == b1 || a1 == b2 || a2 == b1 || a2 == b2;
  if (share) {
    // Two segments from a common point P meet elsewhere only if they leave P
    // along the same ray.
    const Point p = (a1 == b1 || a1 == b2) ? a1 : a2;
    const Point a = a1 == p ? a2 : a1, b = b1 == p ? b2 : b1;
    const double ax = a.x - p.x, ay = a.y - p.y, bx = b.x - p.x, by = b.y - p.y;
    return ax * by - ay * bx == 0.0 && ax * bx + ay * by > 0.0;
  }
  const double rx = a2.x - a1.x, ry = a2.y - a1.y, sx = b2.x - b1.x, sy = b2.y - b1.y;
  const double den = rx * sy - ry * sx;
  const double qx = b1.x - a1.x, qy = b1.y - a1.y;
  if (den == 0.0) {
    if (qx * ry - qy * rx != 0.0) return false;  // parallel, not collinear
    // Collinear: overlap of positive length counts, a single shared endpoint does not.
    const double rr = rx * rx + ry * ry;
    if (rr == 0.0) return false;
    const double t0 = (qx * rx + qy * ry) / rr, t1 = t0 + (sx * rx + sy * ry) / rr;
    const double lo = std::max(0.0, std::min(t0, t1)), hi = std::min(1.0, std::max(t0, t1));
    return hi > lo || (hi == lo && !share);
  }
  const double t = (qx * sy - qy * sx) / den, u = (qx * ry - qy * rx) / den;
  if (t < 0.0 || t > 1.0 || u < 0.0 || u > 1.0) return false;
  if (share) {
    // Meeting only at the shared endpoint is allowed.
    const bool at_a = t == 0.0 || t == 1.0, at_b = u == 0.0 || u == 1.0;
    return !(at_a && at_b);
  }
  return true;
}

/// All pairs of edges (child ids) that cross, by the O(E^2) scan.
inline std::vector<std::pair<std::size_t, std::size_t>> crossing_pairs(const std::vector<Point>& v,
                                                                        const std::vector<std::int64_t>& anc) {
  std::vector<std::size_t> e;
  for (std::size_t i = 0; i < anc.size(); ++i)
    if (anc[i] >= 0) e.push_back(i);
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      const Point a1 = v[e[i]], a2 = v[static_cast<std::size_t>(anc[e[i]])];
      const Point b1 = v[e[j]], b2 = v[static_cast<std::size_t>(anc[e[j]])];
      if (segments_meet(a1, a2, b1, b2)) out.emplace_back(e[i], e[j]);
    }
  return out;
}

// ---------------------------------------------------------------------------
// First passage percolation

struct FppBrute {
  double weight = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> path;
  bool tie = false;  // another simple path within 1e-9 relative of the minimum
};

/// Minimum over all simple paths from s to t of sum |X_i - X_{i+1}|^alpha.
inline FppBrute fpp_brute(const std::vector<Point>& pts, double alpha, std::size_t s, std::size_t t) {
  FppBrute best;
  std::vector<double> weights;
  std::vector<std::size_t> cur{s};
  std::vector<char> used(pts.size(), 0);
  used[s] = 1;
  auto cost = [&](std::size_t a, std::size_t b) {
    return std::pow(std::hypot(pts[a].x - pts[b].x, pts[a].y - pts[b].y), alpha);
  };
  auto rec = [&](auto&& self, double w) -> void {
    const std::size_t last = cur.back();
    if (last == t) {
      weights.push_back(w);
      if (w < best.weight) { best.weight = w; best.path = cur; }
      return;
    }
    for (std::size_t n = 0; n < pts.size(); ++n) {
      if (used[n]) continue;
      used[n] = 1;
      cur.push_back(n);
      self(self, w + cost(last, n));
      cur.pop_back();
      used[n] = 0;
    }
  };
  if (s == t) {
    best.weight = 0.0;
    best.path = {s};
    return best;
  }
  rec(rec, 0.0);
  std::size_t near = 0;
  for (double w : weights)
    if (std::abs(w - best.weight) <= 1e-9 * std::max(1.0, best.weight)) ++near;
  best.tie = near > 1;
  return best;
}

// ---------------------------------------------------------------------------
// Last passage percolation

struct LppBrute {
  double weight = -std::numeric_limits<double>::infinity();
  std::vector<std::pair<int, int>> path;  // from the origin
};

/// Maximum over all up-right paths from (0, 0) to (zx, zy) of the vertex
/// weight sum, summed from the origin. w(x, y) is any callable.
template <class W>
LppBrute lpp_brute(W&& w, int zx, int zy) {
  LppBrute best;
  std::vector<std::pair<int, int>> cur{{0, 0}};
  auto rec = [&](auto&& self, int x, int y) -> void {
    if (x == zx && y == zy) {
      double s = 0.0;
      for (auto [a, b] : cur) s += w(a, b);
      if (s > best.weight) { best.weight = s; best.path = cur; }
      return;
    }
    if (x < zx) { cur.push_back({x + 1, y}); self(self, x + 1, y); cur.pop_back(); }
    if (y < zy) { cur.push_back({x, y + 1}); self(self, x, y + 1); cur.pop_back(); }
  };
  rec(rec, 0, 0);
  return best;
}

inline std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// ---------------------------------------------------------------------------
// Arc crossing

/// Whether (a; b] meets the arc of S(O, r) centred at angle theta with
/// length c, by sign scanning of |a + t (b - a)|^2 - r^2 on a fine grid and
/// bisection. Tangential touches are not detected; callers avoid them.
inline bool arc_crossed(Point a, Point b, double r, double theta, double c, int grid = 4096) {
  auto f = [&](double t) { return sq(a.x + t * (b.x - a.x)) + sq(a.y + t * (b.y - a.y)) - r * r; };
  auto on_arc = [&](double t) {
    const double px = a.x + t * (b.x - a.x), py = a.y + t * (b.y - a.y);
    if (c >= 2.0 * std::numbers::pi * r) return true;
    double d = std::atan2(py, px) - theta;
    d = std::remainder(d, 2.0 * std::numbers::pi);
    return std::abs(d) <= c / (2.0 * r);
  };
  std::vector<double> roots;
  for (int k = 0; k < grid; ++k) {
    double lo = static_cast<double>(k) / grid, hi = static_cast<double>(k + 1) / grid;
    double flo = f(lo), fhi = f(hi);
    if (k == 0 && flo == 0.0) flo = f(1e-300);  // t = 0 is excluded
    if (fhi == 0.0) { roots.push_back(hi); continue; }
    if ((flo < 0) == (fhi < 0)) continue;
    for (int it = 0; it < 200 && hi - lo > 1e-17; ++it) {
      const double mid = 0.5 * (lo + hi);
      if ((f(mid) < 0) == (flo < 0)) lo = mid;
      else hi = mid;
    }
    roots.push_back(0.5 * (lo + hi));
  }
  for (double t : roots)
    if (t > 0.0 && on_arc(t)) return true;
  return false;
}

} // namespace oracle
