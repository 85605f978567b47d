#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "geotree/point_process.hpp"
#include "oracles.hpp"

using namespace geotree;

namespace {

std::vector<std::size_t> sorted(std::vector<std::size_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

} // namespace

TEST(Window, ZeroAreaRectangleIsRejected) {
  EXPECT_THROW(Window::rectangle({0, 0, 0, 5}), InvalidInput);
  EXPECT_THROW(Window::disk(kOrigin, 0.0), InvalidInput);
  EXPECT_THROW(Window::annulus(kOrigin, 3.0, 3.0), InvalidInput);
}

TEST(SamplePpp, NonPositiveIntensityIsRejected) {
  EXPECT_THROW(sample_ppp(Window::disk(kOrigin, 1), 0.0, 1), InvalidInput);
}

TEST(SamplePpp, MeanCountMatchesIntensityTimesArea) {
  const Window w = Window::disk(kOrigin, 10.0);
  const int reps = 10000;
  double sum = 0.0;
  for (int i = 0; i < reps; ++i) sum += static_cast<double>(sample_ppp(w, 1.0, derive_seed(3, i)).size());
  const double expected = 100.0 * std::numbers::pi;
  EXPECT_NEAR(sum / reps, expected, 3.0 * std::sqrt(expected / reps));
}

TEST(SamplePpp, SameSeedGivesSameSequence) {
  const Window w = Window::annulus({1, 2}, 2.0, 9.0);
  const auto a = sample_ppp(w, 1.5, 42), b = sample_ppp(w, 1.5, 42);
  ASSERT_EQ(a.points.size(), b.points.size());
  EXPECT_TRUE(std::equal(a.points.begin(), a.points.end(), b.points.begin()));
  EXPECT_NE(sample_ppp(w, 1.5, 43).points, a.points);
}

TEST(SamplePpp, PointsLieInWindowAndAreDistinct) {
  for (const Window& w : {Window::disk({3, -1}, 6.0), Window::annulus(kOrigin, 4.0, 8.0),
                          Window::rectangle({-2, 1, 7, 3})}) {
    const auto s = sample_ppp(w, 3.0, 9);
    std::set<std::pair<double, double>> seen;
    for (Point p : s.points) {
      EXPECT_TRUE(w.contains(p));
      EXPECT_TRUE(seen.insert({p.x, p.y}).second);
    }
  }
}

TEST(ThinBall, RadiusZeroKeepsEverything) {
  const auto s = sample_ppp(Window::disk(kOrigin, 5), 1.0, 1);
  EXPECT_EQ(thin_ball(s, kOrigin, 0.0).points, s.points);
}

TEST(ThinBall, RadiusBeyondExtentEmptiesSample) {
  const auto s = sample_ppp(Window::disk(kOrigin, 5), 1.0, 1);
  EXPECT_TRUE(thin_ball(s, kOrigin, 5.01).points.empty());
}

TEST(ThinBall, PointStrictlyInsideIsRemoved) {
  PointSample s{{{0.5, 0.0}, {1.0, 0.0}, {0.0, 2.0}}, 1.0, Window::disk(kOrigin, 3), 0};
  const auto t = thin_ball(s, kOrigin, 1.0);
  ASSERT_EQ(t.size(), 2u);
  EXPECT_EQ(t.points[0], (Point{1.0, 0.0}));  // on the sphere: kept (open ball)
}

TEST(ThinBall, NegativeRadiusIsRejected) {
  EXPECT_THROW(thin_ball(PointSample{}, kOrigin, -1.0), InvalidInput);
}

TEST(QueryRegion, EmptySampleGivesEmptySet) {
  PointSample s{{}, 1.0, Window::disk(kOrigin, 5), 0};
  const IndexedSample idx(s);
  EXPECT_TRUE(query_region(idx, BallRegion{kOrigin, 3}).empty());
}

TEST(QueryRegion, BallMatchesLinearScan) {
  const auto s = sample_ppp(Window::rectangle({-10, -10, 10, 10}), 2.5, 11);
  ASSERT_GT(s.size(), 900u);
  const IndexedSample idx(s);
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    const Point c{rng.uniform(-12, 12), rng.uniform(-12, 12)};
    const double r = rng.uniform(0.1, 6.0);
    EXPECT_EQ(sorted(query_region(idx, BallRegion{c, r})), oracle::scan_ball(s.points, c, r));
  }
}

TEST(QueryRegion, HalfStripMatchesLinearScan) {
  const auto s = sample_ppp(Window::rectangle({-10, -10, 10, 10}), 2.5, 12);
  const IndexedSample idx(s);
  Rng rng(6);
  for (int k = 0; k < 50; ++k) {
    const Point c{rng.uniform(-10, 10), rng.uniform(-10, 10)};
    const double rho = rng.uniform(0.2, 3.0);
    EXPECT_EQ(sorted(query_region(idx, HalfStripRegion{c, rho})), oracle::scan_half_strip(s.points, c, rho));
  }
}

TEST(QueryRegion, CylinderMatchesLinearScan) {
  const auto s = sample_ppp(Window::disk(kOrigin, 15), 2.0, 13);
  const IndexedSample idx(s);
  Rng rng(7);
  for (int k = 0; k < 50; ++k) {
    const Point x = polar(rng.uniform(2, 14), rng.uniform(-3.14, 3.14));
    const double rho = rng.uniform(0.2, 2.0);
    std::vector<std::size_t> scan;
    for (std::size_t i = 0; i < s.size(); ++i)
      if (oracle::in_cylinder(s.points[i], x, rho)) scan.push_back(i);
    EXPECT_EQ(sorted(query_region(idx, CylinderRegion{x, rho})), scan);
  }
}

TEST(PoissonField, RegionContentDoesNotDependOnVisitOrder) {
  PoissonField a(77, 1.0), b(77, 1.0);
  const Window w = Window::rectangle({-5, -5, 5, 5});
  b.visit({30, 30, 40, 40}, [](std::size_t, Point) {});  // touch other cells first
  auto pa = a.materialize(w).points, pb = b.materialize(w).points;
  auto less = [](Point p, Point q) { return lex_less(p, q); };
  std::sort(pa.begin(), pa.end(), less);
  std::sort(pb.begin(), pb.end(), less);
  EXPECT_EQ(pa, pb);
}

TEST(PoissonField, ExclusionBallIsRespected) {
  PoissonField f(5, 1.0);
  f.exclude_ball(kOrigin, 3.0);
  for (Point p : f.materialize(Window::disk(kOrigin, 10)).points) EXPECT_GE(norm(p), 3.0);
  EXPECT_THROW(f.exclude_ball(kOrigin, 1.0), InvalidInput);
}
