#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "geotree/branch_stats.hpp"
#include "geotree/campaign.hpp"
#include "oracles.hpp"

using namespace geotree;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

AncestorTree path_tree(std::vector<Point> pts) {
  AncestorTree t;
  t.vertices = std::move(pts);
  t.root = 0;
  t.ancestor.push_back(kNoAncestor);
  for (std::size_t v = 1; v < t.vertices.size(); ++v) t.ancestor.push_back(static_cast<std::int64_t>(v - 1));
  t.extent = 1e9;
  return t;
}

CrossingStats synthetic(std::vector<std::size_t> chis) {
  CrossingStats s;
  for (auto c : chis) s.records.push_back({0, c, c, 0});
  return s;
}

} // namespace

TEST(SegmentArcCrossing, RadialSegmentThroughArcCentre) {
  const double r = 10;
  EXPECT_TRUE(segment_arc_crossing({0.5 * r, 0}, {1.5 * r, 0}, r, 0.0, kTwoPi).hit);
  EXPECT_TRUE(segment_arc_crossing({0.5 * r, 0}, {1.5 * r, 0}, r, 0.0, 0.5).hit);
  EXPECT_FALSE(segment_arc_crossing({0.5 * r, 0}, {1.5 * r, 0}, r, std::numbers::pi, 0.5).hit);
}

TEST(SegmentArcCrossing, SegmentInsideDiskIsNotCounted) {
  EXPECT_FALSE(segment_arc_crossing({1, 1}, {-2, 3}, 10, 0.0, 100.0).hit);
}

TEST(SegmentArcCrossing, VertexOnCircleCountsOnIncomingEdgeOnly) {
  // Branch (5,0) -> (10,0) -> (15,0) with the vertex (10,0) on S(O, 10).
  EXPECT_TRUE(segment_arc_crossing({5, 0}, {10, 0}, 10, 0.0, 1.0).hit);
  EXPECT_FALSE(segment_arc_crossing({10, 0}, {15, 0}, 10, 0.0, 1.0).hit);
  const auto t = path_tree({{0, 0}, {5, 0}, {10, 0}, {15, 0}});
  EXPECT_EQ(edge_crossings(t, 10, 0.0, 1.0).children.size(), 1u);
}

TEST(SegmentArcCrossing, TangentIsFlagged) {
  const auto h = segment_arc_crossing({-3, 10}, {3, 10}, 10, std::numbers::pi / 2, 1.0);
  EXPECT_TRUE(h.hit);
  EXPECT_TRUE(h.tangent);
}

TEST(EdgeCrossings, MatchesBisectionOracleOnRandomTrees) {
  Rng rng(61);
  for (std::uint64_t k = 0; k < 50; ++k) {
    const auto s = thin_ball(sample_ppp(Window::disk(kOrigin, 14), 1.0, derive_seed(60, k)), kOrigin, 1.0);
    const auto t = build_rpt(s, 1.0);
    const double r = rng.uniform(2, 12), theta = rng.uniform(-3.2, 3.2), c = rng.uniform(0.2, 2.0 * kTwoPi * r);
    const auto lib = edge_crossings(t, r, theta, c);
    std::vector<std::size_t> ref;
    for (std::size_t v = 0; v < t.size(); ++v)
      if (t.ancestor[v] != kNoAncestor &&
          oracle::arc_crossed(t.vertices[static_cast<std::size_t>(t.ancestor[v])], t.vertices[v], r, theta, c))
        ref.push_back(v);
    EXPECT_EQ(lib.children, ref) << "tree " << k;
  }
}

TEST(ChiEstimate, LppAxisGeodesicAlwaysCrosses) {
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto t = build_campaign_tree(Model::lpp, 0.0, 60, derive_seed(62, i));
    for (double c : {1.0, 3.0, kTwoPi * 20})
      EXPECT_GE(chi_estimate(t, {Model::lpp, 0.0, 20, 0.0, c, 60}), 1u);
  }
}

TEST(ChiEstimate, SubtreesDyingBeforeRoutGiveZero) {
  const auto t = path_tree({{0, 0}, {5, 0}, {12, 0}});
  const CrossingQuery q{Model::rpt, 1.0, 10, 0.0, kTwoPi, 20};
  EXPECT_EQ(chi_estimate(t, q), 0u);
  const auto cp = chi_and_psi(t, subtree_max_norm(t), q);
  EXPECT_EQ(cp.psi, 1u);
}

TEST(ChiEstimate, RootOnlyTreeHasNoCrossings) {
  const auto t = path_tree({{0, 0}});
  const auto cp = chi_and_psi(t, subtree_max_norm(t), {Model::rpt, 1.0, 10, 0.0, kTwoPi, 20});
  EXPECT_EQ(cp.psi, 0u);
  EXPECT_EQ(cp.chi, 0u);
}

TEST(ChiEstimate, WindowSmallerThanRoutIsRejected) {
  auto t = path_tree({{0, 0}, {5, 0}});
  t.extent = 15;
  EXPECT_THROW(chi_estimate(t, {Model::rpt, 1.0, 10, 0.0, kTwoPi, 20}), InvalidInput);
  EXPECT_THROW(chi_estimate(t, {Model::rpt, 1.0, 10, 0.0, kTwoPi, 5}), InvalidInput);
  EXPECT_THROW(chi_estimate(t, {Model::rpt, 1.0, 10, 0.0, -1.0, 12}), InvalidInput);
}

TEST(RunCampaign, ChiIsNestedInRout) {
  const auto stats = run_campaign({{Model::rpt, 1.0, 10, 0.0, kTwoPi, 20}, {Model::rpt, 1.0, 10, 0.0, kTwoPi, 40}},
                                  200, 63);
  for (std::size_t i = 0; i < 200; ++i) {
    EXPECT_EQ(stats[0].records[i].seed, stats[1].records[i].seed);
    EXPECT_LE(stats[1].records[i].chi, stats[0].records[i].chi);
    EXPECT_EQ(stats[1].records[i].psi, stats[0].records[i].psi);
  }
}

TEST(RunCampaign, NoQueriesGiveEmptyOutput) {
  EXPECT_TRUE(run_campaign({}, 10, 1).empty());
  std::ostringstream os;
  write_crossing_csv(os, {});
  EXPECT_EQ(os.str(), std::string(kCrossingHeader) + "\n");
}

TEST(RunCampaign, SameSeedSameBytes) {
  const std::vector<CrossingQuery> q{{Model::rpt, 1.0, 8, 0.0, kTwoPi, 24}, {Model::fpp, 2.0, 5, 1.0, 2.0, 15},
                                     {Model::lpp, 0.0, 10, std::numbers::pi / 4, 1.0, 30}};
  std::ostringstream a, b;
  write_crossing_csv(a, run_campaign(q, 6, 64, 1));
  write_crossing_csv(b, run_campaign(q, 6, 64, 3));
  EXPECT_EQ(a.str(), b.str());
}

TEST(RunCampaign, CsvRoundTrip) {
  const auto stats = run_campaign({{Model::rpt, 1.0, 8, 0.0, kTwoPi, 24}, {Model::rpt, 1.0, 6, 0.5, 3.0, 18}}, 5, 65);
  std::stringstream ss;
  write_crossing_csv(ss, stats);
  const auto back = read_crossing_csv(ss);
  ASSERT_EQ(back.size(), 2u);
  std::ostringstream again;
  write_crossing_csv(again, back);
  EXPECT_EQ(again.str(), ss.str());
}

TEST(Verdicts, TrendAndFloor) {
  const auto hi = synthetic(std::vector<std::size_t>(100, 3));
  auto lo = synthetic(std::vector<std::size_t>(100, 1));
  EXPECT_TRUE(decreasing_trend({&hi, &lo}).decreasing);
  EXPECT_FALSE(decreasing_trend({&lo, &hi}).decreasing);
  EXPECT_TRUE(nonvanishing(lo).above);
  std::vector<std::size_t> sparse(100, 0);
  for (int k = 0; k < 22; ++k) sparse[static_cast<std::size_t>(k)] = 1;
  EXPECT_FALSE(nonvanishing(synthetic(sparse)).above);  // 22% is not significantly above 20%
  for (int k = 22; k < 35; ++k) sparse[static_cast<std::size_t>(k)] = 1;
  EXPECT_TRUE(nonvanishing(synthetic(sparse)).above);
}

TEST(PsiDistribution, TailsAgreeForFixedArcAndMeanGrowsForFullCircle) {
  const std::size_t reps = 100;
  const auto stats = run_campaign({{Model::rpt, 1.0, 25, 0.0, kTwoPi, 26.25},
                                   {Model::rpt, 1.0, 100, 0.0, kTwoPi, 105},
                                   {Model::rpt, 1.0, 25, 0.0, kTwoPi * 25, 26.25},
                                   {Model::rpt, 1.0, 100, 0.0, kTwoPi * 100, 105}},
                                  reps, 66);
  EXPECT_TRUE(psi_tail(stats[0], stats[1]).agree);
  const double ratio = stats[3].psi_summary().mean / stats[2].psi_summary().mean;
  EXPECT_GT(ratio, 3.0);
  EXPECT_LT(ratio, 5.0);
}

TEST(Deviation, CampaignIsDeterministicAndReportable) {
  const auto a = run_deviation({50, 100, 200}, 1.0, 20, 67, 1);
  const auto b = run_deviation({50, 100, 200}, 1.0, 20, 67, 2);
  std::ostringstream sa, sb;
  write_deviation_csv(sa, a, 1.0);
  write_deviation_csv(sb, b, 1.0);
  EXPECT_EQ(sa.str(), sb.str());
  const auto rep = deviation_report(a);
  EXPECT_EQ(rep.radii.size(), 3u);
  EXPECT_LE(rep.ci_low, rep.ci_high);
  EXPECT_GT(rep.fit.slope, 0.0);
}
