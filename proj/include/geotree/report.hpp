#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "geotree/approx_tv.hpp"
#include "geotree/branch_stats.hpp"
#include "geotree/campaign.hpp"
#include "geotree/dlpp.hpp"
#include "geotree/error.hpp"
#include "geotree/forest_uniform.hpp"
#include "geotree/stats.hpp"

namespace geotree {

enum class CsvKind { crossing, deviation, disagreement, survivors, line, unknown };

inline CsvKind csv_kind(const std::string& header) {
  if (header == kCrossingHeader) return CsvKind::crossing;
  if (header == "r,rho,seed,delta,hops") return CsvKind::deviation;
  if (header == "r,L,rho,replications,p_hat,ci_low,ci_high") return CsvKind::disagreement;
  if (header == "distance,survivors,seed") return CsvKind::survivors;
  if (header == "theta,L,m,seed,survivors") return CsvKind::line;
  return CsvKind::unknown;
}

namespace detail {
inline std::vector<std::vector<std::string>> read_rows(std::istream& is, std::size_t fields) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t ln = 1;
  while (std::getline(is, line)) {
    ++ln;
    if (line.empty()) continue;
    auto f = split_csv(line);
    if (f.size() != fields)
      throw InvalidInput("line " + std::to_string(ln) + ": expected " + std::to_string(fields) + " fields");
    rows.push_back(std::move(f));
  }
  return rows;
}

inline const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }
} // namespace detail

/// Crossing campaigns: one block per (model, parameter, theta, c, R_out / r)
/// with rows ordered by r, a trend verdict (first vs last r) and a
/// non-vanishing verdict at the largest r.
inline void report_crossing(std::ostream& os, const std::vector<CrossingStats>& stats) {
  using Key = std::tuple<std::string, double, double, double, double>;
  std::map<Key, std::vector<const CrossingStats*>> groups;
  for (const auto& s : stats)
    groups[{std::string(to_string(s.query.model)), s.query.param, s.query.theta, s.query.c, s.query.r_out / s.query.r}]
        .push_back(&s);
  for (auto& [key, members] : groups) {
    std::sort(members.begin(), members.end(), [](auto* a, auto* b) { return a->query.r < b->query.r; });
    const auto& [model, param, theta, c, factor] = key;
    os << "crossing model=" << model << " param=" << fmt(param) << " theta=" << fmt(theta) << " c=" << fmt(c)
       << " R_out/r=" << fmt(factor) << " (R_out proxy overcounts semi-infinite branches)\n";
    os << "  r,reps,chi_mean,ci_low,ci_high,psi_mean,frac_chi_pos,tangent\n";
    for (const auto* s : members) {
      const Summary cs = s->chi_summary();
      os << "  " << fmt(s->query.r) << ',' << s->records.size() << ',' << fmt(cs.mean) << ',' << fmt(cs.ci_low) << ','
         << fmt(cs.ci_high) << ',' << fmt(s->psi_summary().mean) << ','
         << fmt(static_cast<double>(s->nonzero()) / static_cast<double>(s->records.size())) << ',' << s->tangent()
         << '\n';
    }
    if (members.size() >= 2) {
      const auto t = decreasing_trend(members);
      os << "  " << detail::verdict(t.decreasing) << " trend: mean chi at r=" << fmt(members.back()->query.r)
         << " below r=" << fmt(members.front()->query.r) << " with disjoint 95% CIs\n";
    }
    const auto f = nonvanishing(*members.back());
    os << "  " << detail::verdict(f.above) << " floor: P(chi >= 1) at r=" << fmt(members.back()->query.r) << " is "
       << fmt(f.fraction) << " > 0.2 (one-sided binomial p=" << fmt(f.p_value) << ")\n";
  }
}

inline void report_deviation(std::ostream& os, std::istream& is) {
  std::map<double, std::vector<DeviationRecord>> by_r;
  for (const auto& f : detail::read_rows(is, 5)) {
    const double r = detail::to_double(f[0], 0);
    by_r[r].push_back({r, detail::to_u64(f[2], 0), detail::to_double(f[3], 0), detail::to_u64(f[4], 0)});
  }
  std::vector<std::vector<DeviationRecord>> recs;
  for (auto& [r, v] : by_r) recs.push_back(std::move(v));
  const auto rep = deviation_report(recs);
  os << "deviation\n  r,median_delta\n";
  for (std::size_t k = 0; k < rep.radii.size(); ++k) os << "  " << fmt(rep.radii[k]) << ',' << fmt(rep.medians[k]) << '\n';
  os << "  " << detail::verdict(rep.in_range) << " slope " << fmt(rep.fit.slope) << " in [0.40, 0.65] (bootstrap 95% CI "
     << fmt(rep.ci_low) << ", " << fmt(rep.ci_high) << ")\n";
}

inline void report_disagreement(std::ostream& os, std::istream& is) {
  std::vector<DisagreementPoint> curve;
  for (const auto& f : detail::read_rows(is, 7)) {
    const auto n = detail::to_u64(f[3], 0);
    const double p = detail::to_double(f[4], 0);
    curve.push_back({detail::to_double(f[0], 0), detail::to_double(f[1], 0), detail::to_double(f[2], 0),
                     wilson(static_cast<std::size_t>(std::llround(p * static_cast<double>(n))), n)});
  }
  os << "disagreement\n  r,p_hat,ci_low,ci_high\n";
  for (const auto& d : curve)
    os << "  " << fmt(d.r) << ',' << fmt(d.estimate.p) << ',' << fmt(d.estimate.ci_low) << ',' << fmt(d.estimate.ci_high) << '\n';
  const auto v = decay_verdict(curve);
  os << "  " << detail::verdict(v.strictly_decreasing) << " p_hat strictly decreasing in r\n";
  os << "  " << detail::verdict(v.slope_ok) << " log-log slope " << fmt(v.fit.slope) << ", one-sided 95% upper bound "
     << fmt(v.slope_upper) << " <= -0.5\n";
}

inline void report_survivors(std::ostream& os, std::istream& is) {
  std::map<std::uint64_t, std::map<double, std::size_t>> by_seed;
  std::vector<std::uint64_t> order;
  for (const auto& f : detail::read_rows(is, 3)) {
    const auto seed = detail::to_u64(f[2], 0);
    if (!by_seed.count(seed)) order.push_back(seed);
    by_seed[seed][detail::to_double(f[0], 0)] = detail::to_u64(f[1], 0);
  }
  if (order.empty()) throw InvalidInput("empty survivor CSV");
  std::vector<std::vector<std::size_t>> curves;
  std::vector<double> distances;
  for (auto& [d, n] : by_seed[order[0]]) distances.push_back(d);
  for (auto s : order) {
    std::vector<std::size_t> c;
    for (auto& [d, n] : by_seed[s]) c.push_back(n);
    curves.push_back(std::move(c));
  }
  const auto v = coalescence_verdict(curves, 0, distances.size() - 1);
  os << "coalescence\n  " << detail::verdict(v.nonmonotone == 0) << " survivors nonincreasing on every realization ("
     << v.nonmonotone << " violations)\n  " << detail::verdict(v.pass) << " mean at distance " << fmt(distances.back())
     << " (" << fmt(v.far.mean) << ") below distance " << fmt(distances.front()) << " (" << fmt(v.near.mean)
     << "), paired one-sided 95% bound " << fmt(v.diff_upper) << " < 0\n";
}

inline void report_line(std::ostream& os, std::istream& is) {
  std::map<std::uint64_t, std::map<std::size_t, std::size_t>> by_seed;
  std::size_t L = 0;
  for (const auto& f : detail::read_rows(is, 5)) {
    L = detail::to_u64(f[1], 0);
    by_seed[detail::to_u64(f[3], 0)][detail::to_u64(f[2], 0)] = detail::to_u64(f[4], 0);
  }
  if (by_seed.empty()) throw InvalidInput("empty line-survivor CSV");
  std::vector<std::vector<std::size_t>> curves;
  for (auto& [s, m] : by_seed) {
    std::vector<std::size_t> c;
    for (auto& [k, n] : m) c.push_back(n);
    curves.push_back(std::move(c));
  }
  const auto v = line_verdict(curves, L);
  os << "lpp-line\n  " << detail::verdict(v.nonmonotone == 0) << " survivors nonincreasing in m on every realization ("
     << v.nonmonotone << " violations)\n  " << detail::verdict(v.pass) << " mean at the largest m " << fmt(v.last.mean)
     << ", one-sided 95% bound " << fmt(v.upper) << " < " << L << '\n';
}

/// Summary table and verdict lines for one result file, by its header.
inline void report_file(std::ostream& os, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::string header;
  std::getline(in, header);
  os << "== " << path << '\n';
  switch (csv_kind(header)) {
  case CsvKind::crossing: {
    std::ifstream again(path);
    report_crossing(os, read_crossing_csv(again));
    break;
  }
  case CsvKind::deviation: report_deviation(os, in); break;
  case CsvKind::disagreement: report_disagreement(os, in); break;
  case CsvKind::survivors: report_survivors(os, in); break;
  case CsvKind::line: report_line(os, in); break;
  case CsvKind::unknown: throw InvalidInput("'" + path + "' is not a recognized result CSV");
  }
}

} // namespace geotree
