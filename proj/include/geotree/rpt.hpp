#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "geotree/error.hpp"
#include "geotree/geometry.hpp"
#include "geotree/point_process.hpp"
#include "geotree/tree.hpp"

namespace geotree {

struct AncestorHit {
  std::size_t id;
  Point point;
};

namespace detail {
/// Larger norm wins; equal norms are broken by the larger (x, y) pair.
inline bool outranks_by_norm(Point p, Point q) {
  const double a = norm2(p), b = norm2(q);
  return a > b || (a == b && lex_less(q, p));
}
} // namespace detail

/// Radial Poisson Tree ancestor of an arbitrary point `x` with |x| > rho: the
/// source point of largest norm in Cyl(x, rho), or nullopt for the root O.
///
/// The cylinder is scanned in slabs of decreasing projection on the axis
/// [O; x]; a point with projection t has norm at most sqrt(t^2 + rho^2),
/// which bounds what later slabs can still offer.
template <PointSource S>
std::optional<AncestorHit> ancestor_rpt(Point x, const S& src, double rho, double slab = 1.0) {
  if (!(rho > 0.0)) throw InvalidInput("rho must be positive");
  const double n = norm(x);
  if (!(n > rho)) throw InvalidInput("ancestor_rpt needs |X| > rho");
  const Point u = (1.0 / n) * x;
  const CylinderRegion cyl{x, rho};
  std::optional<AncestorHit> best;
  double t_hi = n;
  while (true) {
    const double t_lo = t_hi - slab;
    const Box box = oriented_rect_box(kOrigin, u, std::max(t_lo, -rho), t_hi, rho);
    if (!src.covers(box, n)) throw BoundaryExhausted("cylinder search left the sampled window");
    src.visit(box, [&](std::size_t id, Point p) {
      if (cyl.contains(p) && (!best || detail::outranks_by_norm(p, best->point))) best = AncestorHit{id, p};
    });
    if (best) {
      const double tl = std::max(t_lo, 0.0);
      if (norm2(best->point) > tl * tl + rho * rho) return best;
    }
    if (t_lo <= -rho) return best;
    t_hi = t_lo;
  }
}

inline double window_extent(const Window& w) {
  switch (w.shape) {
  case WindowShape::disk: return std::max(0.0, w.outer - norm(w.center));
  case WindowShape::annulus: return norm(w.center) == 0.0 && w.inner == 0.0 ? w.outer : 0.0;
  case WindowShape::rectangle: {
    const Box b = w.bounding_box();
    if (!b.contains(kOrigin)) return 0.0;
    return std::min({-b.xmin, b.xmax, -b.ymin, b.ymax});
  }
  }
  return 0.0;
}

/// RPT on a sample already thinned by B(O, rho). Vertex 0 is the root O and
/// sample point i becomes vertex i + 1.
inline AncestorTree build_rpt(const PointSample& sample, double rho) {
  if (!(rho > 0.0)) throw InvalidInput("rho must be positive");
  for (Point p : sample.points)
    if (norm2(p) < rho * rho) throw InvalidInput("sample must be thinned by B(O, rho) before build_rpt");
  const IndexedSample src(sample);
  AncestorTree t;
  t.model = Model::rpt;
  t.params["rho"] = rho;
  t.seed = sample.seed;
  t.root = 0;
  t.extent = window_extent(sample.window);
  t.vertices.reserve(sample.size() + 1);
  t.vertices.push_back(kOrigin);
  t.vertices.insert(t.vertices.end(), sample.points.begin(), sample.points.end());
  t.ancestor.assign(t.vertices.size(), 0);
  t.ancestor[0] = kNoAncestor;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const auto hit = ancestor_rpt(sample.points[i], src, rho);
    if (hit) t.ancestor[i + 1] = static_cast<std::int64_t>(hit->id + 1);
  }
  return t;
}

/// Branch X_0 = start, X_1 = A(X_0), ..., X_h = O.
struct RadialBranch {
  std::vector<Point> vertices;
  std::size_t hops = 0;
  /// Largest distance to the line (O, start) along the branch.
  double deviation = 0.0;
};

template <PointSource S>
RadialBranch branch_from(Point start, const S& src, double rho) {
  if (!(norm(start) > rho)) throw InvalidInput("branch_from needs |start| > rho");
  RadialBranch b;
  b.vertices.push_back(start);
  Point cur = start;
  while (auto hit = ancestor_rpt(cur, src, rho)) {
    cur = hit->point;
    b.vertices.push_back(cur);
  }
  b.vertices.push_back(kOrigin);
  b.hops = b.vertices.size() - 1;
  const double a = std::atan2(start.y, start.x);
  for (Point p : b.vertices) b.deviation = std::max(b.deviation, std::abs(rotate_into(p, a).y));
  return b;
}

/// Structural audit of an RPT built by build_rpt.
struct RptAudit {
  std::size_t outside_cylinder = 0;
  std::size_t norm_not_decreasing = 0;
  std::size_t argmax_violations = 0;  // sample point in Cyl(X, rho) with |A(X)| < |Y| < |X|
  std::size_t root_with_candidates = 0;  // A(X) = O but Cyl(X, rho) holds a point
  std::size_t crossings = 0;
  std::size_t cycles = 0;

  bool clean() const {
    return outside_cylinder + norm_not_decreasing + argmax_violations + root_with_candidates +
               crossings + cycles ==
           0;
  }
};

inline RptAudit audit_rpt(const AncestorTree& t, const PointSample& sample, double rho) {
  RptAudit a;
  const IndexedSample src(sample);
  for (std::size_t v = 1; v < t.size(); ++v) {
    const Point x = t.vertices[v];
    const auto anc = t.ancestor[v];
    const auto in_cyl = query_region(src, CylinderRegion{x, rho});
    if (anc == 0) {
      if (!in_cyl.empty()) ++a.root_with_candidates;
      continue;
    }
    const Point y = t.vertices[static_cast<std::size_t>(anc)];
    if (!CylinderRegion{x, rho}.contains(y)) ++a.outside_cylinder;
    if (!(norm2(y) < norm2(x))) ++a.norm_not_decreasing;
    for (auto id : in_cyl)
      if (norm2(sample.points[id]) > norm2(y)) ++a.argmax_violations;
  }
  a.crossings = check_noncrossing(t).size();
  a.cycles = find_cycles(t).size();
  return a;
}

} // namespace geotree
