#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <span>
#include <vector>

#include "geotree/campaign.hpp"
#include "geotree/error.hpp"
#include "geotree/euclid_fpp.hpp"
#include "geotree/geometry.hpp"
#include "geotree/rng.hpp"
#include "geotree/stats.hpp"
#include "geotree/tree.hpp"

namespace geotree {

struct LatticePoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend constexpr bool operator==(LatticePoint, LatticePoint) = default;
};

enum class Step : std::uint8_t { none = 0, from_left = 1, from_below = 2 };

/// i.i.d. Exponential(1) weights on N^2. omega(z) is a pure function of
/// (seed, z), so every rectangle of one field agrees with every other.
class LatticeWeights {
public:
  explicit LatticeWeights(std::uint64_t seed) : seed_(seed) {}
  std::uint64_t seed() const { return seed_; }

  double at(std::int64_t x, std::int64_t y) const {
    if (x < 0 || y < 0 || x > 0xFFFFFFFFLL || y > 0xFFFFFFFFLL) throw InvalidInput("lattice vertex outside N^2");
    const std::uint64_t key = (static_cast<std::uint64_t>(x) << 32) | static_cast<std::uint64_t>(y);
    Rng rng(derive_seed(seed_, key));
    return rng.exponential();
  }

private:
  std::uint64_t seed_;
};

/// Weights on the rectangle origin + {0..nx} x {0..ny}, row-major: index y * (nx + 1) + x.
struct WeightGrid {
  std::size_t nx = 0, ny = 0;
  std::vector<double> values;

  std::size_t index(std::size_t x, std::size_t y) const { return y * (nx + 1) + x; }
  double at(std::size_t x, std::size_t y) const { return values[index(x, y)]; }

  static WeightGrid from_field(const LatticeWeights& w, LatticePoint origin, std::size_t nx, std::size_t ny) {
    WeightGrid g{nx, ny, {}};
    g.values.resize((nx + 1) * (ny + 1));
    for (std::size_t y = 0; y <= ny; ++y)
      for (std::size_t x = 0; x <= nx; ++x)
        g.values[g.index(x, y)] = w.at(origin.x + static_cast<std::int64_t>(x), origin.y + static_cast<std::int64_t>(y));
    return g;
  }

  static WeightGrid square(const LatticeWeights& w, std::size_t n) { return from_field(w, {0, 0}, n, n); }
};

/// Passage times on {0..nx} x {0..ny} with the corner (0, 0) as origin.
struct LppGrid {
  std::size_t nx = 0, ny = 0;
  std::vector<double> omega;
  std::vector<double> G;
  std::vector<std::uint8_t> step;

  std::size_t index(std::size_t x, std::size_t y) const { return y * (nx + 1) + x; }
  bool contains(LatticePoint z) const {
    return z.x >= 0 && z.y >= 0 && static_cast<std::size_t>(z.x) <= nx && static_cast<std::size_t>(z.y) <= ny;
  }
  double passage(LatticePoint z) const { return G[index(static_cast<std::size_t>(z.x), static_cast<std::size_t>(z.y))]; }
  Step step_at(LatticePoint z) const {
    return static_cast<Step>(step[index(static_cast<std::size_t>(z.x), static_cast<std::size_t>(z.y))]);
  }
  std::size_t size() const {
    if (nx != ny) throw InvalidInput("grid is not square");
    return nx;
  }
};

/// G(z) = omega(z) + max(G(z - e1), G(z - e2)), missing neighbours at -inf.
/// Rows are filled bottom to top; every cell depends only on its left and
/// lower neighbours, so this is a valid dependency order. Ties prefer
/// FROM_LEFT.
inline LppGrid compute_passage_times(const WeightGrid& w) {
  if (w.values.size() != (w.nx + 1) * (w.ny + 1)) throw InvalidInput("weight grid has the wrong size");
  for (double v : w.values)
    if (!(v >= 0.0)) throw InvalidInput("LPP weights must be nonnegative");
  LppGrid g{w.nx, w.ny, w.values, std::vector<double>(w.values.size()), std::vector<std::uint8_t>(w.values.size())};
  for (std::size_t y = 0; y <= g.ny; ++y) {
    for (std::size_t x = 0; x <= g.nx; ++x) {
      const std::size_t i = g.index(x, y);
      if (x == 0 && y == 0) {
        g.G[i] = g.omega[i];
        g.step[i] = static_cast<std::uint8_t>(Step::none);
      } else if (y == 0 || (x > 0 && g.G[i - 1] >= g.G[i - (g.nx + 1)])) {
        g.G[i] = g.omega[i] + g.G[i - 1];
        g.step[i] = static_cast<std::uint8_t>(Step::from_left);
      } else {
        g.G[i] = g.omega[i] + g.G[i - (g.nx + 1)];
        g.step[i] = static_cast<std::uint8_t>(Step::from_below);
      }
    }
  }
  return g;
}

inline LppGrid compute_passage_times(const LatticeWeights& w, std::size_t n) {
  return compute_passage_times(WeightGrid::square(w, n));
}

inline LatticePoint step_back(LatticePoint z, Step s) {
  switch (s) {
  case Step::from_left: return {z.x - 1, z.y};
  case Step::from_below: return {z.x, z.y - 1};
  case Step::none: break;
  }
  throw InvariantViolation("no step back from the grid origin");
}

/// Geodesic from the origin to z (vertices listed from the origin).
inline GeodesicPath geodesic_to(const LppGrid& g, LatticePoint z) {
  if (!g.contains(z)) throw InvalidInput("lattice vertex outside the grid");
  GeodesicPath p;
  for (LatticePoint v = z;; v = step_back(v, g.step_at(v))) {
    p.vertices.push_back({static_cast<double>(v.x), static_cast<double>(v.y)});
    p.ids.push_back(g.index(static_cast<std::size_t>(v.x), static_cast<std::size_t>(v.y)));
    if (v.x == 0 && v.y == 0) break;
  }
  std::reverse(p.vertices.begin(), p.vertices.end());
  std::reverse(p.ids.begin(), p.ids.end());
  p.weight = g.passage(z);
  return p;
}

/// Geodesic tree of a square grid: vertex y * (N + 1) + x is (x, y), root (0, 0).
inline AncestorTree build_lpp_tree(const LppGrid& g, std::uint64_t seed = 0) {
  const std::size_t n = g.size();
  AncestorTree t;
  t.model = Model::lpp;
  t.params["N"] = static_cast<double>(n);
  t.seed = seed;
  t.root = 0;
  t.extent = static_cast<double>(n);
  t.vertices.resize(g.G.size());
  t.ancestor.resize(g.G.size());
  for (std::size_t y = 0; y <= n; ++y)
    for (std::size_t x = 0; x <= n; ++x) {
      const std::size_t i = g.index(x, y);
      t.vertices[i] = {static_cast<double>(x), static_cast<double>(y)};
      switch (static_cast<Step>(g.step[i])) {
      case Step::none: t.ancestor[i] = kNoAncestor; break;
      case Step::from_left: t.ancestor[i] = static_cast<std::int64_t>(i - 1); break;
      case Step::from_below: t.ancestor[i] = static_cast<std::int64_t>(i - (n + 1)); break;
      }
    }
  return t;
}

/// Proxy of the semi-infinite SW geodesic from z with direction theta + pi.
struct SwGeodesic {
  std::vector<LatticePoint> vertices;  // from z down to the target
  double weight = 0.0;
  std::size_t stable_prefix = 0;       // leading steps shared with the run at horizon m / 2
};

namespace detail {
inline LatticePoint sw_target(LatticePoint z, double theta, double m) {
  const auto mx = static_cast<std::int64_t>(std::llround(m * std::cos(theta)));
  const auto my = static_cast<std::int64_t>(std::llround(m * std::sin(theta)));
  return {z.x - mx, z.y - my};
}

// SW geodesic from z to t <= z, as the reverse of the NE geodesic from t to z.
inline std::vector<LatticePoint> sw_path(LatticePoint z, LatticePoint t, const LatticeWeights& w, double* weight) {
  const auto nx = static_cast<std::size_t>(z.x - t.x), ny = static_cast<std::size_t>(z.y - t.y);
  const LppGrid g = compute_passage_times(WeightGrid::from_field(w, t, nx, ny));
  std::vector<LatticePoint> out;
  LatticePoint v{static_cast<std::int64_t>(nx), static_cast<std::int64_t>(ny)};
  if (weight) *weight = g.passage(v);
  while (true) {
    out.push_back({v.x + t.x, v.y + t.y});
    if (v.x == 0 && v.y == 0) break;
    v = step_back(v, g.step_at(v));
  }
  return out;
}
} // namespace detail

inline SwGeodesic sw_directed_geodesic(LatticePoint z, double theta, std::int64_t m, const LatticeWeights& w) {
  if (!(theta > 0.0 && theta < std::numbers::pi / 2)) throw InvalidInput("theta must lie in (0, pi/2)");
  if (m < 1) throw InvalidInput("horizon m must be at least 1");
  const LatticePoint far = detail::sw_target(z, theta, static_cast<double>(m));
  if (far.x < 0 || far.y < 0) throw BoundaryExhausted("horizon-clipped: SW target leaves N^2");
  SwGeodesic out;
  out.vertices = detail::sw_path(z, far, w, &out.weight);
  const auto half = detail::sw_path(z, detail::sw_target(z, theta, static_cast<double>(m) / 2.0), w, nullptr);
  std::size_t k = 0;
  while (k + 1 < out.vertices.size() && k + 1 < half.size() && out.vertices[k + 1] == half[k + 1]) ++k;
  out.stable_prefix = k;
  return out;
}

/// Distinct SW ancestral lines of the L-vertex anti-diagonal segment after m
/// steps, for each m in `ms`. Every line runs towards one common far target
/// T at distance `horizon` in direction theta + pi, and T is placed at the
/// lattice origin, so the construction stays in N^2. Sharing T makes the
/// ancestor map a tree: lines that meet coincide afterwards.
inline std::vector<std::size_t> line_survivor_curve(double theta, std::size_t L, std::span<const std::size_t> ms,
                                                    const LatticeWeights& w, std::size_t horizon = 0) {
  if (!(theta > 0.0 && theta < std::numbers::pi / 2)) throw InvalidInput("theta must lie in (0, pi/2)");
  if (L == 0) throw InvalidInput("L must be positive");
  std::size_t max_m = 0;
  for (std::size_t k = 0; k < ms.size(); ++k) {
    if (k > 0 && ms[k] < ms[k - 1]) throw InvalidInput("m values must be nondecreasing");
    max_m = std::max(max_m, ms[k]);
  }
  if (horizon == 0) horizon = std::max<std::size_t>(2 * max_m, 1);
  const auto hx = static_cast<std::size_t>(std::llround(static_cast<double>(horizon) * std::cos(theta)));
  const auto hy = static_cast<std::size_t>(std::llround(static_cast<double>(horizon) * std::sin(theta)));
  // Every start is at L1 distance hx + hy + L - 1 from T; a line of that length ends at T.
  if (max_m > hx + hy) throw BoundaryExhausted("m exceeds the survivor horizon");
  const LppGrid g = compute_passage_times(WeightGrid::from_field(w, {0, 0}, hx + L - 1, hy + L - 1));
  std::vector<LatticePoint> pos(L);
  for (std::size_t k = 0; k < L; ++k)
    pos[k] = {static_cast<std::int64_t>(hx + L - 1 - k), static_cast<std::int64_t>(hy + k)};
  std::vector<std::size_t> out;
  std::size_t done = 0;
  std::vector<std::size_t> keys(L);
  for (std::size_t m : ms) {
    for (; done < m; ++done)
      for (auto& p : pos) p = step_back(p, g.step_at(p));
    for (std::size_t k = 0; k < L; ++k) keys[k] = g.index(static_cast<std::size_t>(pos[k].x), static_cast<std::size_t>(pos[k].y));
    std::sort(keys.begin(), keys.end());
    out.push_back(static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin()));
  }
  return out;
}

inline std::size_t line_survivors(double theta, std::size_t L, std::size_t m, const LatticeWeights& w,
                                  std::size_t horizon = 0) {
  const std::size_t ms[1] = {m};
  return line_survivor_curve(theta, L, ms, w, horizon)[0];
}

// ---------------------------------------------------------------------------
// Binary layout (little-endian): N as u64, omega row-major as f64, then G,
// then one step byte per vertex (0 none, 1 from left, 2 from below).

namespace detail {
template <class T>
void put_le(std::ostream& os, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}
template <class T>
T get_le(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw InvalidInput("truncated LPP grid file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}
} // namespace detail

inline void write_lpp_binary(std::ostream& os, const LppGrid& g) {
  detail::put_le<std::uint64_t>(os, g.size());
  for (double v : g.omega) detail::put_le(os, v);
  for (double v : g.G) detail::put_le(os, v);
  os.write(reinterpret_cast<const char*>(g.step.data()), static_cast<std::streamsize>(g.step.size()));
}

inline LppGrid read_lpp_binary(std::istream& is) {
  const auto n = detail::get_le<std::uint64_t>(is);
  if (n > (1u << 20)) throw InvalidInput("LPP grid size is implausible");
  const std::size_t cells = static_cast<std::size_t>((n + 1) * (n + 1));
  LppGrid g{n, n, std::vector<double>(cells), std::vector<double>(cells), std::vector<std::uint8_t>(cells)};
  for (auto& v : g.omega) v = detail::get_le<double>(is);
  for (auto& v : g.G) v = detail::get_le<double>(is);
  if (!is.read(reinterpret_cast<char*>(g.step.data()), static_cast<std::streamsize>(cells)))
    throw InvalidInput("truncated LPP grid file");
  for (auto s : g.step)
    if (s > 2) throw InvalidInput("bad step code in LPP grid file");
  return g;
}

/// SW forest on the box hx + {0..n} x hy + {0..n}, where (hx, hy) is
/// round(horizon (cos theta, sin theta)) and every line heads for the
/// common far target at the origin. Vertex j * (n + 1) + i is
/// (hx + i, hy + j); ancestors leaving the box are cut.
inline AncestorTree build_sw_forest(double theta, std::size_t n, std::size_t horizon, const LatticeWeights& w) {
  if (!(theta > 0.0 && theta < std::numbers::pi / 2)) throw InvalidInput("theta must lie in (0, pi/2)");
  const auto hx = static_cast<std::size_t>(std::llround(static_cast<double>(horizon) * std::cos(theta)));
  const auto hy = static_cast<std::size_t>(std::llround(static_cast<double>(horizon) * std::sin(theta)));
  const LppGrid g = compute_passage_times(WeightGrid::from_field(w, {0, 0}, hx + n, hy + n));
  AncestorTree t;
  t.model = Model::forest_lpp;
  t.params = {{"theta", theta}, {"horizon", static_cast<double>(horizon)}, {"N", static_cast<double>(n)}};
  t.seed = w.seed();
  t.vertices.resize((n + 1) * (n + 1));
  t.ancestor.assign(t.vertices.size(), kNoAncestor);
  for (std::size_t j = 0; j <= n; ++j)
    for (std::size_t i = 0; i <= n; ++i) {
      const LatticePoint z{static_cast<std::int64_t>(hx + i), static_cast<std::int64_t>(hy + j)};
      const std::size_t v = j * (n + 1) + i;
      t.vertices[v] = {static_cast<double>(z.x), static_cast<double>(z.y)};
      if (z.x == 0 && z.y == 0) continue;
      const LatticePoint a = step_back(z, g.step_at(z));
      if (a.x < static_cast<std::int64_t>(hx) || a.y < static_cast<std::int64_t>(hy)) continue;
      t.ancestor[v] = static_cast<std::int64_t>(static_cast<std::size_t>(a.y) - hy) * static_cast<std::int64_t>(n + 1) +
                      (a.x - static_cast<std::int64_t>(hx));
    }
  return t;
}

/// Survivor curves for replications i = 0..reps-1, each on the weight field
/// with seed derive_seed(base, i). Indexed [replication][m].
inline std::vector<std::vector<std::size_t>> run_line_survivors(double theta, std::size_t L,
                                                                const std::vector<std::size_t>& ms,
                                                                std::size_t replications, std::uint64_t base_seed,
                                                                std::size_t threads = 1, std::size_t horizon = 0) {
  std::vector<std::vector<std::size_t>> out(replications);
  parallel_for(replications, threads, [&](std::size_t i) {
    out[i] = line_survivor_curve(theta, L, ms, LatticeWeights(derive_seed(base_seed, i)), horizon);
  });
  return out;
}

inline void write_line_csv(std::ostream& os, const std::vector<std::vector<std::size_t>>& curves, double theta,
                           std::size_t L, const std::vector<std::size_t>& ms, std::uint64_t base_seed) {
  os << "theta,L,m,seed,survivors\n";
  for (std::size_t i = 0; i < curves.size(); ++i)
    for (std::size_t k = 0; k < ms.size(); ++k)
      os << fmt(theta) << ',' << L << ',' << ms[k] << ',' << derive_seed(base_seed, i) << ',' << curves[i][k] << '\n';
}

/// Monotone in m on every realization, and the one-sided 95% upper bound of
/// the mean survivor count at the last m strictly below L.
struct LineVerdict {
  std::size_t nonmonotone = 0;
  Summary last;
  double upper = 0.0;
  bool pass = false;
};

inline LineVerdict line_verdict(const std::vector<std::vector<std::size_t>>& curves, std::size_t L) {
  LineVerdict v;
  std::vector<double> last;
  for (const auto& c : curves) {
    for (std::size_t k = 1; k < c.size(); ++k)
      if (c[k] > c[k - 1]) { ++v.nonmonotone; break; }
    last.push_back(static_cast<double>(c.back()));
  }
  v.last = summarize(last);
  v.upper = v.last.mean + kZ95OneSided * std::sqrt(v.last.var / static_cast<double>(std::max<std::size_t>(v.last.n, 1)));
  v.pass = v.nonmonotone == 0 && v.upper < static_cast<double>(L);
  return v;
}

/// G(N, N) / N for replications i = 0..reps-1.
inline std::vector<double> lpp_shape_samples(std::size_t n, std::size_t replications, std::uint64_t base_seed,
                                             std::size_t threads = 1) {
  if (n == 0) throw InvalidInput("N must be positive");
  std::vector<double> out(replications);
  parallel_for(replications, threads, [&](std::size_t i) {
    const LppGrid g = compute_passage_times(LatticeWeights(derive_seed(base_seed, i)), n);
    out[i] = g.passage({static_cast<std::int64_t>(n), static_cast<std::int64_t>(n)}) / static_cast<double>(n);
  });
  return out;
}

} // namespace geotree
