#include <cmath>

#include <gtest/gtest.h>

#include "geotree/campaign.hpp"
#include "geotree/stats.hpp"

using namespace geotree;

TEST(Summarize, MeanVarianceInterval) {
  const std::vector<double> x{1, 2, 3, 4};
  const auto s = summarize(x);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.var, 5.0 / 3.0);
  EXPECT_NEAR(s.ci_high - s.mean, kZ95 * std::sqrt(5.0 / 3.0 / 4.0), 1e-12);
}

TEST(Median, OddEvenAndQuantile) {
  EXPECT_EQ(median({3, 1, 2}), 2.0);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4, 5}, 0.25), 2.0);
}

TEST(BinomialTail, AgreesWithDirectSum) {
  // Direct sum with exact binomial coefficients for small n.
  const std::size_t n = 20;
  const double p = 0.2;
  for (std::size_t k = 0; k <= n; ++k) {
    double ref = 0.0;
    for (std::size_t j = k; j <= n; ++j) {
      double c = 1.0;
      for (std::size_t i = 1; i <= j; ++i) c = c * static_cast<double>(n - j + i) / static_cast<double>(i);
      ref += c * std::pow(p, static_cast<double>(j)) * std::pow(1 - p, static_cast<double>(n - j));
    }
    EXPECT_NEAR(binomial_upper_tail(k, n, p), ref, 1e-12) << "k = " << k;
  }
}

TEST(Wilson, ContainsEstimate) {
  const auto w = wilson(30, 100);
  EXPECT_DOUBLE_EQ(w.p, 0.3);
  EXPECT_LT(w.ci_low, 0.3);
  EXPECT_GT(w.ci_high, 0.3);
  EXPECT_EQ(wilson(0, 10).ci_low, 0.0);
}

TEST(Fits, ExactLineAndWeightedSe) {
  const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7}, w{1, 1, 1, 1};
  const auto f = ols(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  const auto g = weighted_fit(x, y, w, true);
  // Known unit variances: se = 1 / sqrt(sum (x - xbar)^2) = 1 / sqrt(5).
  EXPECT_NEAR(g.se_slope, 1.0 / std::sqrt(5.0), 1e-12);
}

TEST(Bootstrap, Reproducible) {
  const std::vector<double> r{1, 2, 4};
  const std::vector<std::vector<double>> g{{1, 1.1, 0.9}, {2, 2.1, 1.9}, {4, 4.2, 3.8}};
  EXPECT_EQ(bootstrap_median_slope(r, g, 200, 5), bootstrap_median_slope(r, g, 200, 5));
}

TEST(Campaign, ParseListAndFormat) {
  EXPECT_EQ(parse_list("20,40,80"), (std::vector<double>{20, 40, 80}));
  EXPECT_THROW(parse_list("20,,80"), InvalidInput);
  EXPECT_THROW(parse_list("x"), InvalidInput);
  EXPECT_EQ(fmt(0.1), "0.1");
  EXPECT_EQ(fmt(2.0), "2");
}

TEST(Campaign, ParallelForRethrowsFirstFailure) {
  std::vector<int> out(50, 0);
  EXPECT_THROW(parallel_for(50, 4, [&](std::size_t i) {
                 if (i == 7) throw BoundaryExhausted("seven");
                 out[i] = 1;
               }),
               BoundaryExhausted);
}
