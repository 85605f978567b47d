#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <vector>

#include "geotree/campaign.hpp"
#include "geotree/error.hpp"
#include "geotree/forest_uniform.hpp"
#include "geotree/geometry.hpp"
#include "geotree/point_process.hpp"
#include "geotree/rpt.hpp"
#include "geotree/stats.hpp"

namespace geotree {

/// Ball B(center, L) on which local functionals are evaluated.
struct LocalProbe {
  Point center;
  double L = 1.0;

  void validate() const {
    if (!(L > 0.0)) throw InvalidInput("probe radius L must be positive");
  }
};

/// RPT ancestor id, with the root O encoded as nullopt.
template <PointSource S>
std::optional<std::size_t> rpt_ancestor_id(Point x, const S& src, double rho) {
  const auto hit = ancestor_rpt(x, src, rho);
  if (!hit) return std::nullopt;
  return hit->id;
}

/// Sample points of the probe ball, ascending ids.
template <PointSource S>
std::vector<std::size_t> probe_points(const S& src, const LocalProbe& probe) {
  std::vector<std::size_t> ids;
  const BallRegion ball{probe.center, probe.L};
  src.visit(ball.box(), [&](std::size_t id, Point p) {
    if (ball.contains(p)) ids.push_back(id);
  });
  std::sort(ids.begin(), ids.end());
  return ids;
}

/// True iff some sample point of B(center, L) has different ancestors in the
/// RPT and in the forest F_rho built on the same points.
template <PointSource S>
bool ancestor_disagreement(const S& src, double rho, const LocalProbe& probe) {
  probe.validate();
  if (!(norm(probe.center) > rho + probe.L)) throw InvalidInput("probe must lie outside B(O, rho + L)");
  for (auto id : probe_points(src, probe)) {
    const Point x = src.point(id);
    const auto a = rpt_ancestor_id(x, src, rho);
    const auto b = ancestor_forest_rho(x, src, rho).id;
    if (!a || *a != b) return true;
  }
  return false;
}

/// The in-ball ancestor-edge multiset, one L-local functional: sorted pairs
/// (X, A(X)) over sample points X of the probe ball. The RPT root is encoded
/// by the origin.
using EdgeMultiset = std::vector<std::pair<Point, Point>>;

namespace detail {
inline bool edge_less(const std::pair<Point, Point>& a, const std::pair<Point, Point>& b) {
  if (a.first != b.first) return lex_less(a.first, b.first);
  return lex_less(a.second, b.second);
}
} // namespace detail

template <PointSource S>
EdgeMultiset rpt_local_edges(const S& src, double rho, const LocalProbe& probe) {
  EdgeMultiset e;
  for (auto id : probe_points(src, probe)) {
    const Point x = src.point(id);
    const auto a = ancestor_rpt(x, src, rho);
    e.emplace_back(x, a ? a->point : kOrigin);
  }
  std::sort(e.begin(), e.end(), detail::edge_less);
  return e;
}

template <PointSource S>
EdgeMultiset forest_local_edges(const S& src, double rho, const LocalProbe& probe) {
  EdgeMultiset e;
  for (auto id : probe_points(src, probe)) {
    const Point x = src.point(id);
    e.emplace_back(x, ancestor_forest_rho(x, src, rho).point);
  }
  std::sort(e.begin(), e.end(), detail::edge_less);
  return e;
}

/// A scalar summary of the edge multiset: number of distinct ancestors.
inline std::size_t distinct_ancestors(const EdgeMultiset& e) {
  std::vector<Point> a;
  for (const auto& [x, y] : e) a.push_back(y);
  std::sort(a.begin(), a.end(), lex_less);
  return static_cast<std::size_t>(std::unique(a.begin(), a.end()) - a.begin());
}

/// Half the L1 distance between the empirical laws of two integer samples.
inline double empirical_tv(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::map<std::size_t, double> h;
  for (auto v : a) h[v] += 1.0 / static_cast<double>(a.size());
  for (auto v : b) h[v] -= 1.0 / static_cast<double>(b.size());
  double s = 0.0;
  for (const auto& [k, v] : h) s += std::abs(v);
  return 0.5 * s;
}

struct DisagreementPoint {
  double r = 0.0;
  double L = 0.0;
  double rho = 0.0;
  Proportion estimate;
};

/// Monte Carlo disagreement probability at probes (r, 0). Replication i uses
/// a whole-plane field with seed derive_seed(base, i), thinned by
/// B(O, rho) and shared by all radii; both constructions read the same
/// points, and a lazily generated field has no window edge to manage.
inline std::vector<DisagreementPoint> disagreement_curve(double rho, double L, const std::vector<double>& radii,
                                                         std::size_t replications, std::uint64_t base_seed,
                                                         std::size_t threads = 1) {
  for (double r : radii)
    if (!(r > rho + L)) throw InvalidInput("probe radii must exceed rho + L");
  if (replications < 1) throw InvalidInput("need at least one replication");
  std::vector<std::vector<char>> hit(radii.size(), std::vector<char>(replications, 0));
  parallel_for(replications, threads, [&](std::size_t i) {
    PoissonField field(derive_seed(base_seed, i), 1.0);
    field.exclude_ball(kOrigin, rho);
    for (std::size_t k = 0; k < radii.size(); ++k)
      hit[k][i] = ancestor_disagreement(field, rho, LocalProbe{{radii[k], 0.0}, L}) ? 1 : 0;
  });
  std::vector<DisagreementPoint> out;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const auto hits = static_cast<std::size_t>(std::count(hit[k].begin(), hit[k].end(), 1));
    out.push_back({radii[k], L, rho, wilson(hits, replications)});
  }
  return out;
}

inline void write_disagreement_csv(std::ostream& os, const std::vector<DisagreementPoint>& curve) {
  os << "r,L,rho,replications,p_hat,ci_low,ci_high\n";
  for (const auto& d : curve)
    os << fmt(d.r) << ',' << fmt(d.L) << ',' << fmt(d.rho) << ',' << d.estimate.n << ',' << fmt(d.estimate.p) << ','
       << fmt(d.estimate.ci_low) << ',' << fmt(d.estimate.ci_high) << '\n';
}

/// Weighted log-log fit of p_hat against r, with delta-method variances
/// (1 - p) / (n p) for log p_hat, and its one-sided 95% upper slope bound.
struct DecayVerdict {
  LinearFit fit;
  double slope_upper = 0.0;
  bool strictly_decreasing = false;
  bool slope_ok = false;
};

inline DecayVerdict decay_verdict(const std::vector<DisagreementPoint>& curve, double max_slope = -0.5) {
  DecayVerdict v;
  std::vector<double> x, y, w;
  v.strictly_decreasing = true;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const auto& e = curve[k].estimate;
    if (k > 0 && !(e.p < curve[k - 1].estimate.p)) v.strictly_decreasing = false;
    if (e.hits == 0) throw InvalidInput("no disagreement observed at r = " + fmt(curve[k].r) + "; slope undefined");
    x.push_back(std::log(curve[k].r));
    y.push_back(std::log(e.p));
    w.push_back(static_cast<double>(e.n) * e.p / (1.0 - e.p));
  }
  v.fit = weighted_fit(x, y, w, true);
  v.slope_upper = v.fit.slope + kZ95OneSided * v.fit.se_slope;
  v.slope_ok = v.slope_upper <= max_slope;
  return v;
}

/// exp(-2 rho x^eta) + c0 (x^{2 eta} theta + 1 / x).
inline double lemma_bound(double x, double theta, double eta, double c0, double rho) {
  if (!(eta > 0.0 && eta < 1.0)) throw InvalidInput("eta must lie in (0, 1)");
  if (!(x > 0.0)) throw InvalidInput("x must be positive");
  return std::exp(-2.0 * rho * std::pow(x, eta)) + c0 * (std::pow(x, 2.0 * eta) * std::abs(theta) + 1.0 / x);
}

/// Frequency of A(X) != Abar(X) at the fixed location X = x e^{i theta}.
inline Proportion single_point_disagreement(double x, double theta, double rho, std::size_t replications,
                                            std::uint64_t base_seed, std::size_t threads = 1) {
  const Point X = polar(x, theta);
  std::vector<char> hit(replications, 0);
  parallel_for(replications, threads, [&](std::size_t i) {
    PoissonField field(derive_seed(base_seed, i), 1.0);
    field.exclude_ball(kOrigin, rho);
    const auto a = rpt_ancestor_id(X, field, rho);
    hit[i] = !a || *a != ancestor_forest_rho(X, field, rho).id;
  });
  return wilson(static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1)), replications);
}

/// Fitted envelope constant: the smallest c0 for which the bound meets the
/// observed frequency at the anchor. A reporting convention only.
inline double calibrate_c0(double p_anchor, double x, double theta, double eta, double rho) {
  const double base = std::exp(-2.0 * rho * std::pow(x, eta));
  return std::max(0.0, (p_anchor - base) / (std::pow(x, 2.0 * eta) * std::abs(theta) + 1.0 / x));
}

} // namespace geotree
