#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "geotree/error.hpp"
#include "geotree/rng.hpp"

namespace geotree {

/// Sample mean with a normal-approximation 95% interval.
struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double var = 0.0;  // unbiased
  double ci_low = 0.0;
  double ci_high = 0.0;
};

inline constexpr double kZ95 = 1.959963984540054;
inline constexpr double kZ95OneSided = 1.6448536269514722;

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (s.n == 0) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.var = ss / static_cast<double>(s.n - 1);
  }
  const double half = kZ95 * std::sqrt(s.var / static_cast<double>(s.n));
  s.ci_low = s.mean - half;
  s.ci_high = s.mean + half;
  return s;
}

/// True when a's interval lies entirely below b's.
inline bool ci_strictly_below(const Summary& a, const Summary& b) { return a.ci_high < b.ci_low; }

inline double median(std::vector<double> xs) {
  if (xs.empty()) throw InvalidInput("median of an empty sample");
  const std::size_t k = xs.size() / 2;
  std::nth_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(k), xs.end());
  const double hi = xs[k];
  if (xs.size() % 2 == 1) return hi;
  const double lo = *std::max_element(xs.begin(), xs.begin() + static_cast<std::ptrdiff_t>(k));
  return 0.5 * (lo + hi);
}

/// Empirical q-quantile (type 7, linear interpolation).
inline double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw InvalidInput("quantile of an empty sample");
  std::sort(xs.begin(), xs.end());
  const double h = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

/// P(X >= k) for X ~ Binomial(n, p).
inline double binomial_upper_tail(std::size_t k, std::size_t n, double p) {
  if (k == 0) return 1.0;
  if (k > n) return 0.0;
  if (p <= 0.0) return 0.0;
  if (p >= 1.0) return 1.0;
  double total = 0.0;
  const double lp = std::log(p), lq = std::log1p(-p);
  const double ln = std::lgamma(static_cast<double>(n) + 1.0);
  for (std::size_t j = k; j <= n; ++j) {
    const double jj = static_cast<double>(j);
    total += std::exp(ln - std::lgamma(jj + 1.0) - std::lgamma(static_cast<double>(n - j) + 1.0) + jj * lp +
                      static_cast<double>(n - j) * lq);
  }
  return std::min(1.0, total);
}

/// Wilson 95% interval for a proportion.
struct Proportion {
  std::size_t hits = 0, n = 0;
  double p = 0.0, ci_low = 0.0, ci_high = 0.0;
};

inline Proportion wilson(std::size_t hits, std::size_t n) {
  Proportion r{hits, n};
  if (n == 0) return r;
  const double nn = static_cast<double>(n), z2 = kZ95 * kZ95;
  r.p = static_cast<double>(hits) / nn;
  const double centre = (r.p + z2 / (2 * nn)) / (1 + z2 / nn);
  const double half = kZ95 * std::sqrt(r.p * (1 - r.p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
  r.ci_low = std::max(0.0, centre - half);
  r.ci_high = std::min(1.0, centre + half);
  return r;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double se_slope = 0.0;
};

/// Weighted least squares y ~ a + b x with weights w (inverse variances).
/// With unit weights the residual variance is estimated from the data;
/// otherwise the weights are taken as known.
inline LinearFit weighted_fit(std::span<const double> x, std::span<const double> y, std::span<const double> w,
                              bool known_variance) {
  if (x.size() != y.size() || x.size() != w.size() || x.size() < 2) throw InvalidInput("fit needs matching samples of size >= 2");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) { sw += w[i]; sx += w[i] * x[i]; sy += w[i] * y[i]; }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidInput("fit needs at least two distinct abscissas");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (known_variance) {
    f.se_slope = std::sqrt(1.0 / sxx);
  } else if (x.size() > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double e = y[i] - f.intercept - f.slope * x[i];
      rss += w[i] * e * e;
    }
    f.se_slope = std::sqrt(rss / static_cast<double>(x.size() - 2) / sxx);
  }
  return f;
}

inline LinearFit ols(std::span<const double> x, std::span<const double> y) {
  const std::vector<double> w(x.size(), 1.0);
  return weighted_fit(x, y, w, false);
}

/// Percentile bootstrap interval of the log-log slope of per-group medians.
/// Groups are resampled independently; the generator is seeded, so the
/// interval is reproducible.
inline std::pair<double, double> bootstrap_median_slope(std::span<const double> r,
                                                        const std::vector<std::vector<double>>& groups,
                                                        std::size_t resamples, std::uint64_t seed) {
  std::vector<double> lx, slopes, ly(r.size()), buf;
  for (double v : r) lx.push_back(std::log(v));
  Rng rng(seed);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      const auto& xs = groups[g];
      buf.resize(xs.size());
      for (auto& v : buf) v = xs[static_cast<std::size_t>(rng.uniform() * static_cast<double>(xs.size()))];
      ly[g] = std::log(median(buf));
    }
    slopes.push_back(ols(lx, ly).slope);
  }
  return {quantile(slopes, 0.025), quantile(slopes, 0.975)};
}

/// Empirical survival function P(X > n) for n = 0..max.
inline std::vector<double> survival(std::span<const std::size_t> xs) {
  std::size_t mx = 0;
  for (auto v : xs) mx = std::max(mx, v);
  std::vector<double> s(mx + 1, 0.0);
  for (auto v : xs)
    for (std::size_t n = 0; n < v; ++n) s[n] += 1.0;
  for (auto& v : s) v /= xs.empty() ? 1.0 : static_cast<double>(xs.size());
  return s;
}

/// DKW half-width for an empirical distribution function at level 95%.
inline double dkw_band(std::size_t n) { return std::sqrt(std::log(2.0 / 0.05) / (2.0 * static_cast<double>(n))); }

} // namespace geotree
