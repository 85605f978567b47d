#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <span>
#include <unordered_set>
#include <vector>

#include "geotree/campaign.hpp"
#include "geotree/error.hpp"
#include "geotree/geometry.hpp"
#include "geotree/point_process.hpp"
#include "geotree/rpt.hpp"
#include "geotree/stats.hpp"
#include "geotree/tree.hpp"

namespace geotree {

namespace detail {
/// Strict lexicographic predecessor of x inside its half-strip.
inline bool strip_admissible(Point p, Point x, double rho) {
  return std::abs(p.y - x.y) <= rho && (p.x < x.x || (p.x == x.x && p.y < x.y));
}
} // namespace detail

/// Ancestor of `x` in the directed forest with direction -(1, 0): the source
/// point of largest abscissa in x + (-inf, 0] x [-rho, rho], other than x.
/// Equal abscissas go to the larger ordinate; a candidate at the same
/// abscissa must lie below x, which keeps the map acyclic.
template <PointSource S>
AncestorHit ancestor_forest_rho(Point x, const S& src, double rho, double slab = 1.0) {
  if (!(rho > 0.0)) throw InvalidInput("rho must be positive");
  double x_hi = x.x;
  while (true) {
    const double x_lo = x_hi - slab;
    const Box box{x_lo, x.y - rho, x_hi, x.y + rho};
    if (!src.covers(box)) throw BoundaryExhausted("half-strip search left the sampled window");
    std::optional<AncestorHit> best;
    src.visit(box, [&](std::size_t id, Point p) {
      if (detail::strip_admissible(p, x, rho) && (!best || lex_less(best->point, p))) best = AncestorHit{id, p};
    });
    if (best) return *best;
    x_hi = x_lo;
  }
}

/// Abscissa gap between x and its forest ancestor.
template <PointSource S>
double forest_gap(Point x, const S& src, double rho) {
  return x.x - ancestor_forest_rho(x, src, rho).point.x;
}

/// Forest on every sample point. Points whose strip search leaves the window
/// keep no ancestor; inside `region` that is an error.
inline AncestorTree build_forest_rho(const PointSample& sample, double rho, const Box& region) {
  const IndexedSample src(sample);
  AncestorTree t;
  t.model = Model::forest_rho;
  t.params["rho"] = rho;
  t.seed = sample.seed;
  t.vertices = sample.points;
  t.ancestor.assign(sample.size(), kNoAncestor);
  for (std::size_t i = 0; i < sample.size(); ++i) {
    try {
      t.ancestor[i] = static_cast<std::int64_t>(ancestor_forest_rho(sample.points[i], src, rho).id);
    } catch (const BoundaryExhausted&) {
      if (region.contains(sample.points[i])) throw;
    }
  }
  return t;
}

/// Left margin needed to follow branches for `distance`: distance plus
/// twenty mean jumps.
inline double forest_left_margin(double distance, double rho, double intensity) {
  return distance + 20.0 * std::max(1.0, 1.0 / (2.0 * rho * intensity));
}

/// Sampling window for following branches from points of `starts` to the
/// left by `distance`. The vertical margin allows six standard deviations of
/// the walk's displacement.
inline Window forest_window(const Box& starts, double distance, double rho, double intensity) {
  const double left = forest_left_margin(distance, rho, intensity);
  const double jumps = 2.0 * rho * intensity * left;
  const double vertical = rho * (2.0 + 6.0 * std::sqrt(jumps / 3.0));
  return Window::rectangle({starts.xmin - left, starts.ymin - vertical, starts.xmax + 1.0,
                            starts.ymax + vertical});
}

namespace detail {
/// Shared survivor computation. `first(start)` gives the first ancestor id of
/// a start, `next(id)` the ancestor of a vertex, `abscissa(id)` its x.
template <class First, class Next, class Abscissa>
std::vector<std::size_t> survivor_curve_impl(std::span<const Point> starts,
                                             std::span<const double> distances, First&& first,
                                             Next&& next, Abscissa&& abscissa) {
  for (std::size_t k = 1; k < distances.size(); ++k)
    if (distances[k] < distances[k - 1]) throw InvalidInput("distances must be nondecreasing");
  // reps[k][s]: representative of start s at distance k; starts themselves are -(s + 1).
  std::vector<std::vector<std::int64_t>> reps(distances.size(), std::vector<std::int64_t>(starts.size()));
  for (std::size_t s = 0; s < starts.size(); ++s) {
    std::int64_t cur = -static_cast<std::int64_t>(s) - 1;
    double cur_x = starts[s].x;
    for (std::size_t k = 0; k < distances.size(); ++k) {
      const double threshold = starts[s].x - distances[k];
      while (cur_x > threshold) {
        cur = static_cast<std::int64_t>(cur < 0 ? first(starts[s]) : next(static_cast<std::size_t>(cur)));
        cur_x = abscissa(static_cast<std::size_t>(cur));
      }
      reps[k][s] = cur;
    }
  }
  std::vector<std::size_t> out;
  for (auto& r : reps) {
    std::sort(r.begin(), r.end());
    out.push_back(static_cast<std::size_t>(std::unique(r.begin(), r.end()) - r.begin()));
  }
  return out;
}
} // namespace detail

/// Number of distinct ancestral lines of `starts` once each line has moved
/// `distance` to the left, for every entry of `distances` (nondecreasing).
/// Walks the source directly, without building the whole forest.
template <PointSource S>
std::vector<std::size_t> survivor_curve(const S& src, double rho, std::span<const Point> starts,
                                        std::span<const double> distances) {
  return detail::survivor_curve_impl(
      starts, distances, [&](Point p) { return ancestor_forest_rho(p, src, rho).id; },
      [&](std::size_t id) { return ancestor_forest_rho(src.point(id), src, rho).id; },
      [&](std::size_t id) { return src.point(id).x; });
}

/// Same count on a built forest; starts need not be vertices.
inline std::size_t survivor_count(const AncestorTree& forest, const IndexedSample& src,
                                  std::span<const Point> starts, double distance) {
  const double rho = forest.params.at("rho");
  const double d[1] = {distance};
  return detail::survivor_curve_impl(
      starts, d, [&](Point p) { return ancestor_forest_rho(p, src, rho).id; },
      [&](std::size_t id) -> std::size_t {
        if (forest.ancestor[id] == kNoAncestor)
          throw BoundaryExhausted("branch left the forest's sampled margin");
        return static_cast<std::size_t>(forest.ancestor[id]);
      },
      [&](std::size_t id) { return forest.vertices[id].x; })[0];
}

/// `count` starts evenly spread on the vertical segment {x} x [y0, y0 + length].
inline std::vector<Point> vertical_starts(double x, double y0, double length, std::size_t count) {
  std::vector<Point> s;
  for (std::size_t i = 0; i < count; ++i)
    s.push_back({x, y0 + (count > 1 ? length * static_cast<double>(i) / static_cast<double>(count - 1) : 0.0)});
  return s;
}

/// Survivor curves on independent whole-plane fields: replication i uses
/// seed derive_seed(base, i); starts are `count` points on {0} x [0, length].
/// Result is indexed [replication][distance].
inline std::vector<std::vector<std::size_t>> run_coalescence(double rho, std::size_t count, double length,
                                                             const std::vector<double>& distances,
                                                             std::size_t replications, std::uint64_t base_seed,
                                                             std::size_t threads = 1) {
  if (count == 0) throw InvalidInput("need at least one start");
  std::vector<std::vector<std::size_t>> out(replications);
  const auto starts = vertical_starts(0.0, 0.0, length, count);
  parallel_for(replications, threads, [&](std::size_t i) {
    PoissonField field(derive_seed(base_seed, i), 1.0);
    out[i] = survivor_curve(field, rho, starts, distances);
  });
  return out;
}

inline void write_survivor_csv(std::ostream& os, const std::vector<std::vector<std::size_t>>& curves,
                               const std::vector<double>& distances, std::uint64_t base_seed) {
  os << "distance,survivors,seed\n";
  for (std::size_t i = 0; i < curves.size(); ++i)
    for (std::size_t k = 0; k < distances.size(); ++k)
      os << fmt(distances[k]) << ',' << curves[i][k] << ',' << derive_seed(base_seed, i) << '\n';
}

/// Per-realization monotonicity, and a one-sided 95% test that the mean
/// paired difference (far - near) is negative.
struct CoalescenceVerdict {
  std::size_t nonmonotone = 0;
  Summary near, far;
  double diff_mean = 0.0, diff_upper = 0.0;
  bool pass = false;
};

inline CoalescenceVerdict coalescence_verdict(const std::vector<std::vector<std::size_t>>& curves, std::size_t near_k,
                                              std::size_t far_k) {
  CoalescenceVerdict v;
  std::vector<double> a, b, d;
  for (const auto& c : curves) {
    for (std::size_t k = 1; k < c.size(); ++k)
      if (c[k] > c[k - 1]) { ++v.nonmonotone; break; }
    a.push_back(static_cast<double>(c.at(near_k)));
    b.push_back(static_cast<double>(c.at(far_k)));
    d.push_back(b.back() - a.back());
  }
  v.near = summarize(a);
  v.far = summarize(b);
  const Summary sd = summarize(d);
  v.diff_mean = sd.mean;
  v.diff_upper = sd.mean + kZ95OneSided * std::sqrt(sd.var / static_cast<double>(std::max<std::size_t>(sd.n, 1)));
  v.pass = v.nonmonotone == 0 && v.diff_upper < 0.0;
  return v;
}

} // namespace geotree
