#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "geotree/campaign.hpp"
#include "geotree/dlpp.hpp"
#include "geotree/error.hpp"
#include "geotree/euclid_fpp.hpp"
#include "geotree/geometry.hpp"
#include "geotree/point_process.hpp"
#include "geotree/rpt.hpp"
#include "geotree/stats.hpp"
#include "geotree/tree.hpp"

namespace geotree {

/// Arc of S(O, r) centred at r e^{i theta} with length c, and the radius
/// R_out at which a crossing branch is deemed semi-infinite.
struct CrossingQuery {
  Model model = Model::rpt;
  double param = 1.0;  // rho (rpt), alpha (fpp); unused for lpp
  double r = 1.0;
  double theta = 0.0;
  double c = 2.0 * std::numbers::pi;
  double r_out = 3.0;

  void validate() const {
    if (!(r > 0.0) || !(r < r_out)) throw InvalidInput("crossing query needs 0 < r < R_out");
    if (!(c > 0.0)) throw InvalidInput("arc length must be positive");
    if (model != Model::rpt && model != Model::fpp && model != Model::lpp)
      throw InvalidInput("crossing campaigns run on rpt, fpp or lpp trees");
    if (model == Model::rpt && !(param > 0.0)) throw InvalidInput("rho must be positive");
    if (model == Model::fpp && !(param > 1.0)) throw InvalidInput("alpha must exceed 1");
  }
};

struct ArcHit {
  bool hit = false;
  bool tangent = false;
};

/// Whether the half-open segment (a; b] meets the closed arc. Excluding the
/// ancestor end a means a branch passing exactly through a vertex on the
/// circle is counted once, on the edge that ends there. Near-tangent
/// contacts (discriminant within 1e-12 of zero, relative) are reported as
/// hits and flagged.
inline ArcHit segment_arc_crossing(Point a, Point b, double r, double theta, double c) {
  ArcHit out;
  const Point d = b - a;
  const double A = norm2(d), B = 2.0 * dot(a, d), C = norm2(a) - r * r;
  if (A == 0.0) return out;
  const double disc = B * B - 4.0 * A * C;
  const double scale = B * B + 4.0 * A * std::abs(C);
  double roots[2];
  int nroots = 0;
  if (std::abs(disc) <= 1e-12 * scale) {
    roots[nroots++] = -B / (2.0 * A);
    out.tangent = true;
  } else if (disc > 0.0) {
    const double q = -0.5 * (B + std::copysign(std::sqrt(disc), B));
    roots[nroots++] = q / A;
    if (q != 0.0) roots[nroots++] = C / q;
  }
  const double half = c / (2.0 * r);
  for (int k = 0; k < nroots; ++k) {
    const double t = roots[k];
    if (!(t > 0.0 && t <= 1.0)) continue;
    const Point p = a + t * d;
    if (half >= std::numbers::pi || std::abs(angle_diff(std::atan2(p.y, p.x), theta)) <= half) {
      out.hit = true;
      return out;
    }
  }
  out.tangent = false;
  return out;
}

struct EdgeCrossings {
  std::vector<std::size_t> children;  // child ids X of crossing edges [A(X); X]
  std::size_t tangent = 0;
};

inline EdgeCrossings edge_crossings(const AncestorTree& t, double r, double theta, double c) {
  EdgeCrossings out;
  const double r2 = r * r;
  for (std::size_t v = 0; v < t.size(); ++v) {
    if (t.ancestor[v] == kNoAncestor) continue;
    const Point x = t.vertices[v], a = t.vertices[static_cast<std::size_t>(t.ancestor[v])];
    if (norm2(x) < r2 && norm2(a) < r2) continue;  // inside the disk by convexity
    const ArcHit h = segment_arc_crossing(a, x, r, theta, c);
    if (h.hit) {
      out.children.push_back(v);
      if (h.tangent) ++out.tangent;
    }
  }
  return out;
}

struct ChiPsi {
  std::size_t chi = 0;
  std::size_t psi = 0;
  std::size_t tangent = 0;
};

/// chi: crossing edges whose forward subtree reaches norm R_out; psi: all crossing edges.
inline ChiPsi chi_and_psi(const AncestorTree& t, const std::vector<double>& subtree_max, const CrossingQuery& q) {
  q.validate();
  if (t.extent < q.r_out) throw InvalidInput("tree window is smaller than R_out");
  const EdgeCrossings e = edge_crossings(t, q.r, q.theta, q.c);
  ChiPsi out{0, e.children.size(), e.tangent};
  for (auto v : e.children)
    if (subtree_max[v] >= q.r_out) ++out.chi;
  return out;
}

inline std::size_t chi_estimate(const AncestorTree& t, const CrossingQuery& q) {
  return chi_and_psi(t, subtree_max_norm(t), q).chi;
}

/// Radius of the sampled disk for a campaign reaching R_out. The margin only
/// supplies vertices beyond R_out for the proxy test.
inline double campaign_window_radius(double r_out) { return 1.1 * r_out + 5.0; }

/// One tree per (model, parameter, seed), large enough for R_out.
inline AncestorTree build_campaign_tree(Model model, double param, double r_out, std::uint64_t seed) {
  switch (model) {
  case Model::rpt: {
    const auto s = thin_ball(sample_ppp(Window::disk(kOrigin, campaign_window_radius(r_out)), 1.0, seed), kOrigin, param);
    return build_rpt(s, param);
  }
  case Model::fpp: {
    const auto s = sample_ppp(Window::disk(kOrigin, campaign_window_radius(r_out)), 1.0, seed);
    return build_fpp_tree(s, param);
  }
  case Model::lpp: {
    const auto n = static_cast<std::size_t>(std::ceil(r_out)) + 1;
    return build_lpp_tree(compute_passage_times(LatticeWeights(seed), n), seed);
  }
  default: break;
  }
  throw InvalidInput("no campaign tree for model " + std::string(to_string(model)));
}

struct CrossingRecord {
  std::uint64_t seed = 0;
  std::size_t chi = 0;
  std::size_t psi = 0;
  std::size_t tangent = 0;
};

struct CrossingStats {
  CrossingQuery query;
  std::vector<CrossingRecord> records;

  Summary chi_summary() const {
    std::vector<double> v;
    for (const auto& r : records) v.push_back(static_cast<double>(r.chi));
    return summarize(v);
  }
  Summary psi_summary() const {
    std::vector<double> v;
    for (const auto& r : records) v.push_back(static_cast<double>(r.psi));
    return summarize(v);
  }
  std::size_t nonzero() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](auto& r) { return r.chi >= 1; }));
  }
  std::size_t tangent() const {
    std::size_t n = 0;
    for (const auto& r : records) n += r.tangent;
    return n;
  }
};

/// Replication i of every query uses seed derive_seed(base_seed, i). Queries
/// sharing a model and parameter share realizations: the tree is built once
/// per replication at the largest R_out of the group.
inline std::vector<CrossingStats> run_campaign(const std::vector<CrossingQuery>& queries, std::size_t replications,
                                               std::uint64_t base_seed, std::size_t threads = 1) {
  if (queries.empty()) return {};
  if (replications < 2) throw InvalidInput("a campaign needs at least 2 replications");
  for (const auto& q : queries) q.validate();
  std::vector<CrossingStats> out(queries.size());
  for (std::size_t k = 0; k < queries.size(); ++k) {
    out[k].query = queries[k];
    out[k].records.resize(replications);
  }
  std::map<std::pair<Model, double>, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < queries.size(); ++k)
    groups[{queries[k].model, queries[k].model == Model::lpp ? 0.0 : queries[k].param}].push_back(k);
  for (const auto& [key, members] : groups) {
    double r_out = 0.0;
    for (auto k : members) r_out = std::max(r_out, queries[k].r_out);
    parallel_for(replications, threads, [&](std::size_t i) {
      const std::uint64_t seed = derive_seed(base_seed, i);
      const AncestorTree t = build_campaign_tree(key.first, key.second, r_out, seed);
      const auto submax = subtree_max_norm(t);
      for (auto k : members) {
        const ChiPsi cp = chi_and_psi(t, submax, queries[k]);
        out[k].records[i] = {seed, cp.chi, cp.psi, cp.tangent};
      }
    });
  }
  return out;
}

inline double query_param_column(const CrossingQuery& q) { return q.model == Model::lpp ? q.theta : q.param; }

inline constexpr const char* kCrossingHeader = "model,rho_or_alpha_or_theta,r,theta,c,R_out,seed,chi,psi";

inline void write_crossing_csv(std::ostream& os, const std::vector<CrossingStats>& stats) {
  os << kCrossingHeader << '\n';
  for (const auto& s : stats) {
    const auto& q = s.query;
    const std::string prefix = std::string(to_string(q.model)) + ',' + fmt(query_param_column(q)) + ',' + fmt(q.r) +
                               ',' + fmt(q.theta) + ',' + fmt(q.c) + ',' + fmt(q.r_out) + ',';
    for (const auto& r : s.records)
      os << prefix << r.seed << ',' << r.chi << ',' << r.psi << '\n';
  }
}

inline void write_crossing_aggregate(std::ostream& os, const std::vector<CrossingStats>& stats) {
  os << "model,rho_or_alpha_or_theta,r,theta,c,R_out,replications,mean,var,ci_low,ci_high,psi_mean,frac_chi_pos,"
        "tangent\n";
  for (const auto& s : stats) {
    const auto& q = s.query;
    const Summary c = s.chi_summary(), p = s.psi_summary();
    os << to_string(q.model) << ',' << fmt(query_param_column(q)) << ',' << fmt(q.r) << ',' << fmt(q.theta) << ','
       << fmt(q.c) << ',' << fmt(q.r_out) << ',' << s.records.size() << ',' << fmt(c.mean) << ',' << fmt(c.var)
       << ',' << fmt(c.ci_low) << ',' << fmt(c.ci_high) << ',' << fmt(p.mean) << ','
       << fmt(static_cast<double>(s.nonzero()) / static_cast<double>(s.records.size())) << ',' << s.tangent()
       << '\n';
  }
}

namespace detail {
inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}
inline double to_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidInput("line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}
inline std::uint64_t to_u64(const std::string& s, std::size_t line) {
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw InvalidInput("line " + std::to_string(line) + ": bad integer '" + s + "'");
  return v;
}
} // namespace detail

/// Reads per-replication rows back, grouping consecutive rows of one query.
inline std::vector<CrossingStats> read_crossing_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kCrossingHeader) throw InvalidInput("not a crossing CSV (header mismatch)");
  std::vector<CrossingStats> out;
  std::size_t ln = 1;
  while (std::getline(is, line)) {
    ++ln;
    if (line.empty()) continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 9) throw InvalidInput("line " + std::to_string(ln) + ": expected 9 fields");
    CrossingQuery q;
    q.model = model_from_string(f[0]);
    q.r = detail::to_double(f[2], ln);
    q.theta = detail::to_double(f[3], ln);
    q.c = detail::to_double(f[4], ln);
    q.r_out = detail::to_double(f[5], ln);
    q.param = q.model == Model::lpp ? 0.0 : detail::to_double(f[1], ln);
    const CrossingRecord rec{detail::to_u64(f[6], ln), detail::to_u64(f[7], ln), detail::to_u64(f[8], ln), 0};
    const auto same = [&](const CrossingQuery& a) {
      return a.model == q.model && a.param == q.param && a.r == q.r && a.theta == q.theta && a.c == q.c &&
             a.r_out == q.r_out;
    };
    if (out.empty() || !same(out.back().query)) out.push_back({q, {}});
    out.back().records.push_back(rec);
  }
  return out;
}

/// Mean chi at the largest r strictly below the mean at the smallest r, with
/// disjoint 95% intervals.
struct TrendVerdict {
  Summary first, last;
  bool decreasing = false;
};

inline TrendVerdict decreasing_trend(const std::vector<const CrossingStats*>& by_r) {
  if (by_r.size() < 2) throw InvalidInput("a trend needs at least two radii");
  TrendVerdict v{by_r.front()->chi_summary(), by_r.back()->chi_summary(), false};
  v.decreasing = ci_strictly_below(v.last, v.first);
  return v;
}

/// One-sided binomial test of H0: P(chi >= 1) <= floor.
struct FloorVerdict {
  std::size_t hits = 0, n = 0;
  double fraction = 0.0, p_value = 1.0;
  bool above = false;
};

inline FloorVerdict nonvanishing(const CrossingStats& s, double floor = 0.2, double level = 0.05) {
  FloorVerdict v;
  v.hits = s.nonzero();
  v.n = s.records.size();
  v.fraction = v.n ? static_cast<double>(v.hits) / static_cast<double>(v.n) : 0.0;
  v.p_value = binomial_upper_tail(v.hits, v.n, floor);
  v.above = v.p_value < level;
  return v;
}

/// Sup-distance between the empirical tails P(psi > n) of two campaigns,
/// against the sum of their 95% DKW bands.
struct TailComparison {
  std::vector<double> tail_a, tail_b;
  double sup_diff = 0.0;
  double band = 0.0;
  bool agree = false;
};

inline TailComparison psi_tail(const CrossingStats& a, const CrossingStats& b) {
  std::vector<std::size_t> pa, pb;
  for (const auto& r : a.records) pa.push_back(r.psi);
  for (const auto& r : b.records) pb.push_back(r.psi);
  TailComparison t{survival(pa), survival(pb)};
  const std::size_t n = std::max(t.tail_a.size(), t.tail_b.size());
  for (std::size_t k = 0; k < n; ++k) {
    const double x = k < t.tail_a.size() ? t.tail_a[k] : 0.0, y = k < t.tail_b.size() ? t.tail_b[k] : 0.0;
    t.sup_diff = std::max(t.sup_diff, std::abs(x - y));
  }
  t.band = dkw_band(pa.size()) + dkw_band(pb.size());
  t.agree = t.sup_diff <= t.band;
  return t;
}

// ---------------------------------------------------------------------------
// Deviation of the radial branch from (r, 0)

struct DeviationRecord {
  double r = 0.0;
  std::uint64_t seed = 0;
  double delta = 0.0;
  std::size_t hops = 0;
};

/// Replication i uses one whole-plane field with seed derive_seed(base, i),
/// thinned by B(O, rho), shared by all radii.
inline std::vector<std::vector<DeviationRecord>> run_deviation(const std::vector<double>& radii, double rho,
                                                               std::size_t replications, std::uint64_t base_seed,
                                                               std::size_t threads = 1) {
  for (double r : radii)
    if (!(r > rho)) throw InvalidInput("deviation radii must exceed rho");
  if (replications < 2) throw InvalidInput("a campaign needs at least 2 replications");
  std::vector<std::vector<DeviationRecord>> out(radii.size(), std::vector<DeviationRecord>(replications));
  parallel_for(replications, threads, [&](std::size_t i) {
    const std::uint64_t seed = derive_seed(base_seed, i);
    PoissonField field(seed, 1.0);
    field.exclude_ball(kOrigin, rho);
    for (std::size_t k = 0; k < radii.size(); ++k) {
      const RadialBranch b = branch_from({radii[k], 0.0}, field, rho);
      out[k][i] = {radii[k], seed, b.deviation, b.hops};
    }
  });
  return out;
}

inline void write_deviation_csv(std::ostream& os, const std::vector<std::vector<DeviationRecord>>& recs, double rho) {
  os << "r,rho,seed,delta,hops\n";
  for (const auto& by_r : recs)
    for (const auto& d : by_r) os << fmt(d.r) << ',' << fmt(rho) << ',' << d.seed << ',' << fmt(d.delta) << ',' << d.hops << '\n';
}

struct DeviationReport {
  std::vector<double> radii, medians;
  LinearFit fit;
  double ci_low = 0.0, ci_high = 0.0;  // bootstrap 95% interval of the slope
  bool in_range = false;
};

/// Log-log OLS slope of median deviation against r; passes when the slope
/// estimate lies in [lo, hi].
inline DeviationReport deviation_report(const std::vector<std::vector<DeviationRecord>>& recs, double lo = 0.40,
                                        double hi = 0.65, std::uint64_t bootstrap_seed = 1) {
  DeviationReport rep;
  std::vector<std::vector<double>> groups;
  std::vector<double> lx, ly;
  for (const auto& by_r : recs) {
    if (by_r.empty()) continue;
    std::vector<double> d;
    for (const auto& x : by_r) d.push_back(x.delta);
    rep.radii.push_back(by_r.front().r);
    rep.medians.push_back(median(d));
    lx.push_back(std::log(rep.radii.back()));
    ly.push_back(std::log(rep.medians.back()));
    groups.push_back(std::move(d));
  }
  rep.fit = ols(lx, ly);
  std::tie(rep.ci_low, rep.ci_high) = bootstrap_median_slope(rep.radii, groups, 2000, bootstrap_seed);
  rep.in_range = rep.fit.slope >= lo && rep.fit.slope <= hi;
  return rep;
}

} // namespace geotree
