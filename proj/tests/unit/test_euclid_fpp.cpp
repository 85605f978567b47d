#include <cmath>

#include <gtest/gtest.h>

#include "geotree/campaign.hpp"
#include "geotree/euclid_fpp.hpp"
#include "oracles.hpp"

using namespace geotree;

namespace {

PointSample fixed(std::vector<Point> pts) {
  return PointSample{std::move(pts), 1.0, Window::rectangle({-50, -50, 50, 50}), 0};
}

/// n uniform points in the unit square.
PointSample uniform_points(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  PointSample s{{}, static_cast<double>(n), Window::rectangle({0, 0, 1, 1}), seed};
  for (std::size_t i = 0; i < n; ++i) s.points.push_back({rng.uniform(), rng.uniform()});
  return s;
}

} // namespace

TEST(PathWeight, Examples) {
  const std::vector<Point> a{{0, 0}, {1, 0}}, b{{0, 0}, {1, 0}, {2, 0}}, c{{0, 0}, {3, 4}};
  EXPECT_EQ(path_weight(a, 2.0), 1.0);
  EXPECT_EQ(path_weight(b, 2.0), 2.0);
  EXPECT_EQ(path_weight(c, 2.0), 25.0);
  EXPECT_NEAR(path_weight(c, 3.0), 125.0, 1e-12);
}

TEST(PathWeight, RejectsBadInput) {
  const std::vector<Point> one{{0, 0}}, two{{0, 0}, {1, 1}};
  EXPECT_THROW(path_weight(one, 2.0), InvalidInput);
  EXPECT_THROW(path_weight(two, 0.0), InvalidInput);
}

TEST(Geodesic, TwoPointSampleIsDirect) {
  const auto s = fixed({{0, 0}, {3, 1}});
  const auto g = geodesic({0, 0}, {3, 1}, s, 2.0);
  EXPECT_EQ(g.vertices, (std::vector<Point>{{0, 0}, {3, 1}}));
  EXPECT_EQ(g.weight, 10.0);
}

TEST(Geodesic, CollinearDetourIsCheaper) {
  const auto s = fixed({{0, 0}, {1, 0}, {2, 0}});
  for (auto kind : {FppEngineKind::dense, FppEngineKind::gabriel}) {
    const auto g = geodesic({0, 0}, {2, 0}, s, 2.0, kind);
    EXPECT_EQ(g.vertices, (std::vector<Point>{{0, 0}, {1, 0}, {2, 0}}));
    EXPECT_EQ(g.weight, 2.0);
  }
}

TEST(Geodesic, PointsOutsideSampleAreRejected) {
  const auto s = fixed({{0, 0}, {1, 0}});
  EXPECT_THROW(geodesic({0, 0}, {5, 5}, s, 2.0), InvalidInput);
  EXPECT_THROW(geodesic({0, 0}, {1, 0}, s, 1.0), InvalidInput);
  EXPECT_THROW(FppEngine(s, 1.5, FppEngineKind::gabriel), InvalidInput);
}

TEST(Geodesic, MatchesExhaustiveEnumeration) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto s = uniform_points(8, derive_seed(40, seed));
    for (double alpha : {2.0, 1.5}) {
      const FppEngine dense(s, alpha, FppEngineKind::dense);
      for (std::size_t a = 0; a < 8; ++a)
        for (std::size_t b = a + 1; b < 8; ++b) {
          const auto ref = oracle::fpp_brute(s.points, alpha, a, b);
          const auto g = dense.geodesic(a, b);
          EXPECT_NEAR(g.weight, ref.weight, 1e-9 * ref.weight);
          if (!ref.tie) { EXPECT_EQ(g.ids, ref.path); }
          if (alpha >= 2.0) {
            const FppEngine gab(s, alpha, FppEngineKind::gabriel);
            EXPECT_EQ(gab.geodesic(a, b).ids, g.ids);
          }
        }
    }
  }
}

TEST(BuildFppTree, EmptySampleIsRejected) {
  EXPECT_THROW(build_fpp_tree(fixed({}), 2.0), InvalidInput);
}

TEST(BuildFppTree, SmallSamples) {
  const auto one = build_fpp_tree(fixed({{1, 1}}), 2.0);
  EXPECT_EQ(one.size(), 1u);
  EXPECT_EQ(one.root, 0);
  EXPECT_EQ(one.edge_count(), 0u);
  const auto two = build_fpp_tree(fixed({{3, 3}, {1, 1}}), 2.0);
  EXPECT_EQ(two.root, 1);
  EXPECT_EQ(two.ancestor[0], 1);
  EXPECT_EQ(two.edge_count(), 1u);
}

TEST(BuildFppTree, TreePathsArePairwiseGeodesics) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = uniform_points(8, derive_seed(41, seed));
    const auto t = build_fpp_tree(s, 2.0);
    const auto root = static_cast<std::size_t>(t.root);
    for (std::size_t v = 0; v < t.size(); ++v) {
      std::vector<std::size_t> path;
      for (std::int64_t u = static_cast<std::int64_t>(v); u != kNoAncestor; u = t.ancestor[static_cast<std::size_t>(u)])
        path.push_back(static_cast<std::size_t>(u));
      std::reverse(path.begin(), path.end());
      ASSERT_EQ(path.front(), root);
      const auto ref = oracle::fpp_brute(s.points, 2.0, root, v);
      if (!ref.tie) { EXPECT_EQ(path, ref.path); }
    }
  }
}

TEST(BuildFppTree, GabrielAndDenseEnginesAgree) {
  for (double alpha : {2.0, 3.0}) {
    const auto s = sample_ppp(Window::disk(kOrigin, 10), 1.0, 77);
    const auto a = build_fpp_tree(s, alpha, FppEngineKind::dense);
    const auto b = build_fpp_tree(s, alpha, FppEngineKind::gabriel);
    EXPECT_EQ(a.ancestor, b.ancestor) << "alpha = " << alpha;
  }
}

TEST(EmptyDiameterBalls, SingleEdgeTree) {
  const auto s = fixed({{3, 3}, {1, 1}});
  EXPECT_TRUE(check_empty_diameter_balls(build_fpp_tree(s, 2.0), s).empty());
}

TEST(EmptyDiameterBalls, PlantedEdgeThroughClusterIsReported) {
  const auto s = fixed({{0, 0}, {4, 0}, {2, 0.1}, {2, -0.2}});
  AncestorTree t;
  t.vertices = s.points;
  t.ancestor = {kNoAncestor, 0, 0, 0};
  t.root = 0;
  const auto v = check_empty_diameter_balls(t, s);
  ASSERT_EQ(v.size(), 2u);
  EXPECT_EQ(v[0].child, 1u);
}

TEST(EmptyDiameterBalls, RandomTreesAreCleanAndPlanar) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = sample_ppp(Window::disk(kOrigin, 12.6), 1.0, derive_seed(42, seed));
    const auto t = build_fpp_tree(s, 2.0);
    EXPECT_TRUE(check_empty_diameter_balls(t, s).empty());
    // Independent audit: linear scan of every diameter ball.
    for (std::size_t v = 0; v < t.size(); ++v) {
      if (t.ancestor[v] == kNoAncestor) continue;
      const Point x = t.vertices[v], y = t.vertices[static_cast<std::size_t>(t.ancestor[v])];
      const auto in = oracle::scan_ball(s.points, {(x.x + y.x) / 2, (x.y + y.y) / 2}, std::hypot(x.x - y.x, x.y - y.y) / 2);
      for (auto id : in) EXPECT_TRUE(s.points[id] == x || s.points[id] == y);
    }
    EXPECT_TRUE(oracle::crossing_pairs(t.vertices, t.ancestor).empty());
  }
}

TEST(DirectedGeodesic, TwoPointSample) {
  const auto s = fixed({{0, 0}, {-10, 0}});
  const FppEngine e(s, 2.0);
  const auto g = directed_geodesic(e, 0, 0.0, 10.0);
  EXPECT_EQ(g.path.ids, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(g.stable_prefix, 1u);
}

TEST(DirectedGeodesic, NoPointNearTargetIsBoundaryExhausted) {
  const auto s = fixed({{0, 0}, {-1, 0}});
  EXPECT_THROW(directed_geodesic(FppEngine(s, 2.0), 0, 0.0, 20.0), BoundaryExhausted);
}

TEST(DirectedGeodesic, StablePrefixGrowsWithHorizon) {
  double small = 0.0, large = 0.0;
  const int reps = 100;
  for (int i = 0; i < reps; ++i) {
    const auto s = sample_ppp(Window::disk(kOrigin, 40), 1.0, derive_seed(43, static_cast<std::uint64_t>(i)));
    const FppEngine e(s, 2.0);
    const std::size_t x = closest_to_origin(s);
    small += static_cast<double>(directed_geodesic(e, x, 0.0, 8.0).stable_prefix);
    large += static_cast<double>(directed_geodesic(e, x, 0.0, 32.0).stable_prefix);
  }
  EXPECT_GE(large / reps, small / reps);
}

TEST(AssembleForestAlpha, StartsHaveOutDegreeOne) {
  const auto s = sample_ppp(Window::disk(kOrigin, 30), 1.0, 44);
  const FppEngine e(s, 2.0);
  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (norm(s.points[i]) < 4) starts.push_back(i);
  const auto t = assemble_forest_alpha(e, starts, 0.0, 16.0);
  EXPECT_EQ(t.edge_count(), starts.size());
  for (auto x : starts) {
    ASSERT_NE(t.ancestor[x], kNoAncestor);
    EXPECT_LT(t.vertices[static_cast<std::size_t>(t.ancestor[x])].x, t.vertices[x].x + 2.0);
  }
}
