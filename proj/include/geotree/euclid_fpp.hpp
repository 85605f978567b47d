#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <utility>
#include <vector>

#include "geotree/error.hpp"
#include "geotree/geometry.hpp"
#include "geotree/point_process.hpp"
#include "geotree/rpt.hpp"
#include "geotree/tree.hpp"

namespace geotree {

struct GeodesicPath {
  std::vector<Point> vertices;
  std::vector<std::size_t> ids;  // sample ids (FPP) or lattice indices (LPP)
  double weight = 0.0;
};

/// |a - b|^alpha. alpha == 2 avoids the square root entirely.
inline double edge_cost(Point a, Point b, double alpha) {
  const double d2 = norm2(a - b);
  return alpha == 2.0 ? d2 : std::pow(d2, 0.5 * alpha);
}

/// Neumaier-compensated sum of |X_i - X_{i+1}|^alpha.
inline double path_weight(std::span<const Point> path, double alpha) {
  if (!(alpha > 0.0)) throw InvalidInput("alpha must be positive");
  if (path.size() < 2) throw InvalidInput("a path needs at least two vertices");
  double sum = 0.0, comp = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const double v = edge_cost(path[i], path[i + 1], alpha);
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  return sum + comp;
}

enum class FppEngineKind { dense, gabriel, automatic };

/// Single-source shortest path result over sample ids.
struct ShortestPaths {
  std::size_t source = 0;
  std::vector<double> dist;
  std::vector<std::int64_t> pred;

  std::vector<std::size_t> path_to(std::size_t target) const {
    if (!std::isfinite(dist[target])) throw InvariantViolation("target unreachable");
    std::vector<std::size_t> p;
    for (std::int64_t v = static_cast<std::int64_t>(target); v != kNoAncestor; v = pred[static_cast<std::size_t>(v)])
      p.push_back(static_cast<std::size_t>(v));
    std::reverse(p.begin(), p.end());
    return p;
  }
};

/// Gabriel graph: {X, Y} is kept unless some Z lies in the open ball with
/// diameter [X; Y]. For alpha >= 2 such a Z gives a strictly cheaper detour,
/// so every geodesic uses Gabriel edges only and shortest paths on this
/// graph are exact.
class GabrielGraph {
public:
  GabrielGraph() = default;

  explicit GabrielGraph(const IndexedSample& src) {
    const std::size_t n = src.size();
    std::vector<std::vector<std::size_t>> adj(n);
    const Box domain = src.index().bounds().expanded(1.0);
    const double cell = src.index().cell_size();
    std::vector<Point> poly, tmp;
    std::vector<std::size_t> near;
    for (std::size_t xi = 0; xi < n; ++xi) {
      const Point x = src.point(xi);
      poly = {{domain.xmin, domain.ymin}, {domain.xmax, domain.ymin}, {domain.xmax, domain.ymax}, {domain.xmin, domain.ymax}};
      // Y can only be a neighbour if <X - Z, Y - Z> >= 0 for every other Z,
      // i.e. Y lies in the intersection of these half-planes. Grow the scan
      // radius until the clipped region fits inside it.
      double scanned = 0.0, radius = 3.0 * cell, reach = 0.0;
      near.clear();
      while (true) {
        src.visit(Box::around(x, radius), [&](std::size_t zi, Point z) {
          const double d2 = norm2(z - x);
          if (zi == xi || d2 <= scanned * scanned || d2 > radius * radius) return;
          near.push_back(zi);
          const Point a = x - z;
          const double slack = 1e-9 * (norm(a) * (norm(z) + 1.0));
          clip(poly, tmp, a, dot(a, z) - slack);
        });
        reach = 0.0;
        for (Point p : poly) reach = std::max(reach, dist(p, x));
        if (reach <= radius || (Box::around(x, radius).contains(domain))) break;
        scanned = radius;
        radius *= 2.0;
      }
      for (std::size_t yi : near) {
        if (yi < xi) continue;
        const Point y = src.point(yi);
        if (dist(x, y) > reach || !inside(poly, y)) continue;
        if (is_gabriel_edge(src, xi, yi)) {
          adj[xi].push_back(yi);
          adj[yi].push_back(xi);
        }
      }
    }
    offsets_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::sort(adj[i].begin(), adj[i].end());
      offsets_[i + 1] = offsets_[i] + adj[i].size();
    }
    for (auto& a : adj) ids_.insert(ids_.end(), a.begin(), a.end());
  }

  std::span<const std::size_t> neighbours(std::size_t v) const {
    return {ids_.data() + offsets_[v], offsets_[v + 1] - offsets_[v]};
  }
  std::size_t edge_count() const { return ids_.size() / 2; }

  /// Exact test: no third point Z with |XZ|^2 + |ZY|^2 < |XY|^2. The small
  /// relative margin only ever keeps extra edges.
  static bool is_gabriel_edge(const IndexedSample& src, std::size_t xi, std::size_t yi) {
    const Point x = src.point(xi), y = src.point(yi);
    const Point m = 0.5 * (x + y);
    const double d2 = norm2(x - y);
    bool blocked = false;
    src.visit(Box::around(m, 0.5 * std::sqrt(d2)), [&](std::size_t zi, Point z) {
      if (blocked || zi == xi || zi == yi) return;
      if (norm2(z - x) + norm2(z - y) < d2 * (1.0 - 1e-12)) blocked = true;
    });
    return !blocked;
  }

private:
  // Sutherland-Hodgman step against {p : <a, p> >= b}.
  static void clip(std::vector<Point>& poly, std::vector<Point>& tmp, Point a, double b) {
    tmp.clear();
    const std::size_t k = poly.size();
    for (std::size_t i = 0; i < k; ++i) {
      const Point p = poly[i], q = poly[(i + 1) % k];
      const double fp = dot(a, p) - b, fq = dot(a, q) - b;
      if (fp >= 0.0) tmp.push_back(p);
      if ((fp >= 0.0) != (fq >= 0.0)) tmp.push_back(p + (fp / (fp - fq)) * (q - p));
    }
    poly.swap(tmp);
  }

  static bool inside(const std::vector<Point>& poly, Point y) {
    if (poly.size() < 3) return false;
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Point p = poly[i], q = poly[(i + 1) % poly.size()];
      const double c = cross(q - p, y - p);
      if (c < -1e-9 * (norm(q - p) * (norm(y - p) + 1.0))) return false;
    }
    return true;
  }

  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> ids_;
};

/// Exact Euclidean FPP shortest paths on a sample. The dense engine relaxes
/// the complete graph (quadratic, distances computed on the fly); the
/// Gabriel engine is only valid for alpha >= 2.
class FppEngine {
public:
  FppEngine(const PointSample& sample, double alpha, FppEngineKind kind = FppEngineKind::automatic)
      : src_(sample), alpha_(alpha) {
    if (!(alpha > 1.0)) throw InvalidInput("Euclidean FPP needs alpha > 1");
    if (kind == FppEngineKind::automatic)
      kind = alpha >= 2.0 && sample.size() > 64 ? FppEngineKind::gabriel : FppEngineKind::dense;
    if (kind == FppEngineKind::gabriel) {
      if (alpha < 2.0) throw InvalidInput("Gabriel pruning is exact only for alpha >= 2");
      graph_.emplace(src_);
    }
    kind_ = kind;
  }

  const IndexedSample& source() const { return src_; }
  double alpha() const { return alpha_; }
  FppEngineKind kind() const { return kind_; }
  const GabrielGraph* gabriel() const { return graph_ ? &*graph_ : nullptr; }

  /// Dijkstra from `source`; stops early once `stop_at` is settled.
  ShortestPaths shortest_paths(std::size_t source, std::optional<std::size_t> stop_at = {}) const {
    const std::size_t n = src_.size();
    ShortestPaths sp{source, std::vector<double>(n, std::numeric_limits<double>::infinity()),
                     std::vector<std::int64_t>(n, kNoAncestor)};
    sp.dist[source] = 0.0;
    const auto& pts = src_.sample().points;
    if (kind_ == FppEngineKind::dense) {
      std::vector<char> done(n, 0);
      for (std::size_t it = 0; it < n; ++it) {
        std::size_t u = n;
        double du = std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < n; ++v)
          if (!done[v] && sp.dist[v] < du) { du = sp.dist[v]; u = v; }
        if (u == n) break;
        done[u] = 1;
        if (stop_at && u == *stop_at) break;
        for (std::size_t v = 0; v < n; ++v) {
          if (done[v]) continue;
          const double nd = du + edge_cost(pts[u], pts[v], alpha_);
          if (nd < sp.dist[v]) { sp.dist[v] = nd; sp.pred[v] = static_cast<std::int64_t>(u); }
        }
      }
      return sp;
    }
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
      const auto [du, u] = heap.top();
      heap.pop();
      if (du > sp.dist[u]) continue;
      if (stop_at && u == *stop_at) break;
      for (std::size_t v : graph_->neighbours(u)) {
        const double nd = du + edge_cost(pts[u], pts[v], alpha_);
        if (nd < sp.dist[v]) {
          sp.dist[v] = nd;
          sp.pred[v] = static_cast<std::int64_t>(u);
          heap.emplace(nd, v);
        }
      }
    }
    return sp;
  }

  GeodesicPath geodesic(std::size_t from, std::size_t to) const {
    return make_path(shortest_paths(from, to), to);
  }

  GeodesicPath make_path(const ShortestPaths& sp, std::size_t to) const {
    GeodesicPath g;
    g.ids = sp.path_to(to);
    for (auto id : g.ids) g.vertices.push_back(src_.point(id));
    g.weight = g.vertices.size() >= 2 ? path_weight(g.vertices, alpha_) : 0.0;
    return g;
  }

private:
  IndexedSample src_;
  double alpha_;
  FppEngineKind kind_ = FppEngineKind::dense;
  std::optional<GabrielGraph> graph_;
};

inline std::size_t find_sample_point(const PointSample& s, Point p) {
  for (std::size_t i = 0; i < s.size(); ++i)
    if (s.points[i] == p) return i;
  throw InvalidInput("point is not in the sample");
}

/// Minimal-weight path from x to y over the sample points.
inline GeodesicPath geodesic(Point x, Point y, const PointSample& sample, double alpha,
                             FppEngineKind kind = FppEngineKind::automatic) {
  const std::size_t xi = find_sample_point(sample, x), yi = find_sample_point(sample, y);
  return FppEngine(sample, alpha, kind).geodesic(xi, yi);
}

/// Index of the sample point closest to the origin (ties: smaller (x, y)).
inline std::size_t closest_to_origin(const PointSample& s) {
  if (s.points.empty()) throw InvalidInput("empty sample");
  std::size_t best = 0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double a = norm2(s.points[i]), b = norm2(s.points[best]);
    if (a < b || (a == b && lex_less(s.points[i], s.points[best]))) best = i;
  }
  return best;
}

/// Geodesic tree rooted at the sample point closest to O. Vertex ids are sample ids.
inline AncestorTree build_fpp_tree(const FppEngine& engine) {
  const PointSample& s = engine.source().sample();
  if (s.points.empty()) throw InvalidInput("build_fpp_tree needs a nonempty sample");
  const std::size_t root = closest_to_origin(s);
  const ShortestPaths sp = engine.shortest_paths(root);
  AncestorTree t;
  t.model = Model::fpp;
  t.params["alpha"] = engine.alpha();
  t.seed = s.seed;
  t.root = static_cast<std::int64_t>(root);
  t.extent = window_extent(s.window);
  t.vertices = s.points;
  t.ancestor = sp.pred;
  return t;
}

inline AncestorTree build_fpp_tree(const PointSample& sample, double alpha,
                                   FppEngineKind kind = FppEngineKind::automatic) {
  if (sample.points.empty()) throw InvalidInput("build_fpp_tree needs a nonempty sample");
  return build_fpp_tree(FppEngine(sample, alpha, kind));
}

struct BallViolation {
  std::size_t child;
  std::size_t intruder;  // sample id inside the open diameter ball
};

/// For every edge {X, A(X)}, sample points strictly inside the ball with diameter [X; A(X)].
inline std::vector<BallViolation> check_empty_diameter_balls(const AncestorTree& t, const PointSample& sample) {
  const IndexedSample src(sample);
  std::vector<BallViolation> out;
  for (std::size_t v = 0; v < t.size(); ++v) {
    if (t.ancestor[v] == kNoAncestor) continue;
    const Point x = t.vertices[v], y = t.vertices[static_cast<std::size_t>(t.ancestor[v])];
    const BallRegion ball{0.5 * (x + y), 0.5 * dist(x, y)};
    for (auto id : query_region(src, ball)) {
      const Point z = sample.points[id];
      if (z == x || z == y) continue;
      out.push_back({v, id});
    }
  }
  return out;
}

/// Finite proxy of the semi-infinite geodesic from a point in direction theta + pi.
struct DirectedGeodesic {
  GeodesicPath path;             // towards the sample point nearest x + D e^{i(theta + pi)}
  std::size_t stable_prefix = 0; // leading edges shared with the run at horizon D / 2
};

namespace detail {
inline std::optional<std::size_t> nearest_other(const IndexedSample& src, Point target, std::size_t skip,
                                                double max_radius) {
  double r = 2.0 * src.index().cell_size();
  const Box dom = src.index().bounds();
  while (true) {
    std::optional<std::size_t> best;
    double bd = 0.0;
    src.visit(Box::around(target, r), [&](std::size_t id, Point p) {
      if (id == skip) return;
      const double d = norm2(p - target);
      if (d <= r * r && (!best || d < bd || (d == bd && id < *best))) { best = id; bd = d; }
    });
    if (best) return best;
    if (r > max_radius || Box::around(target, r).contains(dom)) return std::nullopt;
    r *= 2.0;
  }
}
} // namespace detail

inline DirectedGeodesic directed_geodesic(const FppEngine& engine, std::size_t x, double theta, double horizon) {
  const IndexedSample& src = engine.source();
  const Point origin = src.point(x);
  const double dir = theta + std::numbers::pi;
  const Point far_target = origin + polar(horizon, dir);
  const auto far = detail::nearest_other(src, far_target, x, horizon / 4.0);
  if (!far || dist(src.point(*far), far_target) > horizon / 4.0)
    throw BoundaryExhausted("no sample point within horizon/4 of the directed target");
  const auto half = detail::nearest_other(src, origin + polar(horizon / 2.0, dir), x, 1e300);
  const ShortestPaths sp = engine.shortest_paths(x);
  DirectedGeodesic out;
  out.path = engine.make_path(sp, *far);
  const auto short_ids = sp.path_to(*half);
  std::size_t k = 0;
  while (k + 1 < out.path.ids.size() && k + 1 < short_ids.size() && out.path.ids[k + 1] == short_ids[k + 1]) ++k;
  out.stable_prefix = k;
  return out;
}

/// Directed forest assembled from the first edge of each start's directed
/// geodesic. Only the listed starts get an ancestor.
inline AncestorTree assemble_forest_alpha(const FppEngine& engine, std::span<const std::size_t> starts,
                                          double theta, double horizon) {
  const PointSample& s = engine.source().sample();
  AncestorTree t;
  t.model = Model::forest_alpha;
  t.params = {{"alpha", engine.alpha()}, {"theta", theta}, {"horizon", horizon}};
  t.seed = s.seed;
  t.vertices = s.points;
  t.ancestor.assign(s.size(), kNoAncestor);
  for (std::size_t x : starts) {
    const auto g = directed_geodesic(engine, x, theta, horizon);
    if (g.path.ids.size() >= 2) t.ancestor[x] = static_cast<std::int64_t>(g.path.ids[1]);
  }
  return t;
}

} // namespace geotree
