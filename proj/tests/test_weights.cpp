#include <gtest/gtest.h>

#include <random>
#include <set>

#include "spotar/oracle.hpp"
#include "spotar/weights.hpp"
#include "support.hpp"

using namespace spotar;

namespace {

const char* kTrajectories = "80,e1:8;e4:6\n20,e1:10;e4:10\n100,e1:8\n";

WeightStore with_paths(const test::RunningExample& ex,
                       std::vector<std::pair<std::vector<EdgeId>, JointDist::Rows>> joints) {
  std::vector<Histogram> hs;
  std::vector<bool> measured;
  for (std::uint32_t i = 0; i < ex.net.edge_count(); ++i) {
    hs.push_back(ex.store.edge_weight(EdgeId(i)));
    measured.push_back(true);
  }
  std::vector<std::pair<std::vector<EdgeId>, PathWeight>> pws;
  for (auto& [es, rows] : joints) pws.push_back({es, PathWeight{JointDist(es, rows), 100}});
  return WeightStore(ex.net, hs, measured, pws);
}

// A line of n edges l0..l{n-1}.
Network line_network(std::size_t n) {
  std::string text = "#nodes\n";
  for (std::size_t i = 0; i <= n; ++i) text += "v" + std::to_string(i) + ",57," + std::to_string(10 + 0.01 * i) + "\n";
  text += "#edges\n";
  for (std::size_t i = 0; i < n; ++i)
    text += "l" + std::to_string(i) + ",v" + std::to_string(i) + ",v" + std::to_string(i + 1) + ",100,10\n";
  return parse_network(text);
}

}  // namespace

TEST(BuildStore, RunningExampleTrajectories) {
  const auto ex = test::running_example();
  const auto recs = parse_trajectories(kTrajectories, ex.net);
  const WeightStore s = build_store(ex.net, recs);
  const EdgeId e1 = ex.net.edge_by_name("e1"), e4 = ex.net.edge_by_name("e4");
  EXPECT_TRUE(approx_equal(s.edge_weight(e1), Histogram({{8, 0.9}, {10, 0.1}})));
  EXPECT_TRUE(approx_equal(s.edge_weight(e4), Histogram({{6, 0.8}, {10, 0.2}})));
  const std::vector<EdgeId> p{e1, e4};
  const PathWeight* w = s.find_path_weight(p);
  ASSERT_NE(w, nullptr);
  EXPECT_EQ(w->support, 100);
  EXPECT_TRUE(approx_equal(w->joint, JointDist(p, {{{8, 6}, 0.8}, {{10, 10}, 0.2}})));
  EXPECT_EQ(s.path_weights().size(), 1u);
  EXPECT_EQ(s.fallback_count(), 7u);
}

TEST(BuildStore, MinSupportThreshold) {
  const auto ex = test::running_example();
  const auto recs = parse_trajectories(kTrajectories, ex.net);
  StoreOptions o;
  o.min_support = 101;
  EXPECT_TRUE(build_store(ex.net, recs, o).path_weights().empty());
}

TEST(BuildStore, FallbackPointMass) {
  const Network net = parse_network("#nodes\na,57,10\nb,57,10.01\n#edges\nx,a,b,100,10\n");
  const WeightStore s = build_store(net, {});
  EXPECT_EQ(s.edge_weight(EdgeId(0)), Histogram::point_mass(10));
  EXPECT_FALSE(s.measured(EdgeId(0)));
}

TEST(BuildStore, RejectsBadTrajectories) {
  const auto ex = test::running_example();
  EXPECT_THROW(parse_trajectories("5,e1:8;e9:3\n", ex.net), ParseError);
  EXPECT_THROW(parse_trajectories("5,e1:8;zz:3\n", ex.net), ParseError);
  EXPECT_THROW(parse_trajectories("0,e1:8\n", ex.net), ParseError);
}

TEST(Trajectories, RoundingTiesUp) {
  const Network net = parse_network("#nodes\na,57,10\nb,57,10.01\n#edges\nx,a,b,100,10\n", "n", 2);
  const auto recs = parse_trajectories("1,x:3\n1,x:0.4\n1,x:4.9\n", net);
  EXPECT_EQ(recs[0].times[0], 4);
  EXPECT_EQ(recs[1].times[0], 2);
  EXPECT_EQ(recs[2].times[0], 4);
}

TEST(Store, RoundTripIsByteIdentical) {
  const auto ex = test::running_example();
  const std::string a = format_store(ex.store, ex.net);
  const std::string b = format_store(parse_store(a, ex.net), ex.net);
  EXPECT_EQ(a, b);
}

TEST(Store, RejectsWrongFormat) {
  const auto ex = test::running_example();
  EXPECT_THROW(parse_store("{\"format\":\"other\",\"version\":1}", ex.net), ParseError);
  EXPECT_THROW(parse_store("not json", ex.net), ParseError);
}

TEST(Coarsest, OverlappingUnits) {
  const auto ex = test::running_example();
  const auto e14 = test::edges(ex.net, {"e1", "e4"}), e49 = test::edges(ex.net, {"e4", "e9"});
  const WeightStore s = with_paths(ex, {{e14, {{{8, 6}, 0.8}, {{10, 10}, 0.2}}},
                                        {e49, {{{6, 5}, 0.5}, {{6, 9}, 0.3}, {{10, 9}, 0.2}}}});
  const auto p = test::edges(ex.net, {"e1", "e4", "e9"});
  EXPECT_EQ(coarsest_combination(s, p), (std::vector<UnitSpan>{{0, 2}, {1, 3}}));
  const auto single = test::edges(ex.net, {"e1"});
  EXPECT_EQ(coarsest_combination(s, single), (std::vector<UnitSpan>{{0, 1}}));
}

TEST(Coarsest, LineGraphAgainstExhaustiveScan) {
  const Network net = line_network(10);
  std::vector<EdgeId> all;
  for (std::uint32_t i = 0; i < 10; ++i) all.push_back(EdgeId(i));
  std::mt19937_64 rng(21);
  for (int it = 0; it < 200; ++it) {
    std::vector<std::pair<std::vector<EdgeId>, PathWeight>> pws;
    std::set<std::pair<std::size_t, std::size_t>> stored;
    std::uniform_int_distribution<std::size_t> start(0, 8), len(2, 5), count(0, 6);
    for (std::size_t k = count(rng); k > 0; --k) {
      const std::size_t b = start(rng), e = std::min<std::size_t>(10, b + len(rng));
      if (!stored.insert({b, e}).second) continue;
      std::vector<EdgeId> es(all.begin() + b, all.begin() + e);
      JointDist::Rows rows{{std::vector<Time>(es.size(), 10), 1.0}};
      pws.push_back({es, PathWeight{JointDist(es, rows), 10}});
    }
    std::vector<Histogram> hs(10, Histogram::point_mass(10));
    const WeightStore s(net, hs, std::vector<bool>(10, true), pws);
    const auto units = coarsest_combination(s, all);

    // Covers the path in order, consecutive units overlap or abut.
    ASSERT_FALSE(units.empty());
    EXPECT_EQ(units.front().begin, 0u);
    EXPECT_EQ(units.back().end, 10u);
    for (std::size_t i = 1; i < units.size(); ++i) {
      EXPECT_LT(units[i - 1].begin, units[i].begin);
      EXPECT_LE(units[i].begin, units[i - 1].end);
      EXPECT_LT(units[i - 1].end, units[i].end);
    }
    // Each unit is stored or a single edge, and no stored unit is strictly coarser.
    for (const UnitSpan& u : units) {
      const bool ok = u.end - u.begin == 1 || stored.count({u.begin, u.end});
      EXPECT_TRUE(ok);
      for (auto [b, e] : stored)
        EXPECT_FALSE(b <= u.begin && u.end <= e && e - b > u.end - u.begin);
    }
    // Every stored unit lies inside a chosen one.
    for (auto [b, e] : stored) {
      bool inside = false;
      for (const UnitSpan& u : units) inside |= u.begin <= b && e <= u.end;
      EXPECT_TRUE(inside);
    }
  }
}

TEST(PathJoint, PaceThreeEdges) {
  const auto ex = test::running_example();
  const CostModel pace(ex.store, CostMode::Pace);
  const auto p = test::edges(ex.net, {"e1", "e4", "e9"});
  const JointDist j = path_joint(pace, p);
  EXPECT_TRUE(approx_equal(j, JointDist(p, {{{8, 6, 5}, 0.32}, {{8, 6, 9}, 0.48}, {{10, 10, 5}, 0.08},
                                             {{10, 10, 9}, 0.12}})));
  EXPECT_TRUE(approx_equal(to_cost(j), Histogram({{19, 0.32}, {23, 0.48}, {25, 0.08}, {29, 0.12}})));
}

TEST(PathJoint, EdgeProduct) {
  const auto ex = test::running_example();
  const CostModel edge(ex.store, CostMode::Edge);
  const auto p = test::edges(ex.net, {"e1", "e5"});
  EXPECT_TRUE(approx_equal(path_joint(edge, p), JointDist(p, {{{8, 8}, 0.72}, {{8, 10}, 0.18},
                                                                {{10, 8}, 0.08}, {{10, 10}, 0.02}})));
}

TEST(PathJoint, OverlapFusion) {
  const auto ex = test::running_example();
  const auto e14 = test::edges(ex.net, {"e1", "e4"}), e49 = test::edges(ex.net, {"e4", "e9"});
  const WeightStore s = with_paths(ex, {{e14, {{{8, 6}, 0.8}, {{10, 10}, 0.2}}},
                                        {e49, {{{6, 5}, 0.5}, {{6, 9}, 0.3}, {{10, 9}, 0.2}}}});
  const CostModel pace(s, CostMode::Pace);
  const auto p = test::edges(ex.net, {"e1", "e4", "e9"});
  EXPECT_TRUE(approx_equal(to_cost(path_joint(pace, p)), Histogram({{19, 0.5}, {23, 0.3}, {29, 0.2}})));
  EXPECT_TRUE(approx_equal(direct_path_cost(pace, p), Histogram({{19, 0.5}, {23, 0.3}, {29, 0.2}})));
}

TEST(PathJoint, InconsistentOverlap) {
  const auto ex = test::running_example();
  const auto e14 = test::edges(ex.net, {"e1", "e4"}), e49 = test::edges(ex.net, {"e4", "e9"});
  const WeightStore s = with_paths(ex, {{e14, {{{8, 6}, 1.0}}}, {e49, {{{7, 5}, 1.0}}}});
  const CostModel pace(s, CostMode::Pace);
  EXPECT_THROW(path_joint(pace, test::edges(ex.net, {"e1", "e4", "e9"})), InconsistentWeightsError);
}

TEST(PathJoint, PaceEqualsEdgeWithoutPathWeights) {
  const auto ex = test::running_example();
  const WeightStore bare = with_paths(ex, {});
  const CostModel pace(bare, CostMode::Pace), edge(ex.store, CostMode::Edge);
  for (auto p : {test::edges(ex.net, {"e1", "e4", "e9"}), test::edges(ex.net, {"e2", "e3", "e5", "e8"})}) {
    EXPECT_TRUE(approx_equal(to_cost(path_joint(pace, p)), to_cost(path_joint(edge, p))));
    Histogram fold = Histogram::point_mass(0);
    for (EdgeId e : p) fold = convolve(fold, ex.store.edge_weight(e));
    EXPECT_TRUE(approx_equal(to_cost(path_joint(edge, p)), fold));
  }
}

TEST(ExtendJoint, RunningExample) {
  const auto ex = test::running_example();
  const CostModel pace(ex.store, CostMode::Pace);
  const JointDist base = path_joint(pace, test::edges(ex.net, {"e2", "e6"}));
  const JointDist j = extend_joint(pace, base, ex.net.edge_by_name("e9"));
  EXPECT_TRUE(approx_equal(to_cost(j), Histogram({{18, 0.28}, {22, 0.42}, {25, 0.12}, {29, 0.18}})));
}

TEST(ExtendJoint, PointMassShift) {
  const Network net = parse_network(
      "#nodes\na,57,10\nb,57,10.01\nc,57,10.02\n#edges\nx,a,b,100,10\ny,b,c,70,10\n");
  const auto recs = parse_trajectories("3,x:9\n1,x:12\n", net);
  const WeightStore s = build_store(net, recs);
  const CostModel m(s, CostMode::Pace);
  const JointDist base = path_joint(m, std::vector<EdgeId>{EdgeId(0)});
  EXPECT_TRUE(approx_equal(to_cost(extend_joint(m, base, EdgeId(1))), Histogram({{16, 0.75}, {19, 0.25}})));
}

TEST(ExtendJoint, IncrementalMatchesRecompute) {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Instance inst = gen_instance(seed, 8, 0.4, 0.7);
    const WeightStore s = build_store(inst.net, inst.trajectories);
    for (CostMode mode : {CostMode::Pace, CostMode::Edge}) {
      const CostModel m(s, mode);
      for (const TrajectoryRecord& rec : inst.trajectories) {
        std::vector<EdgeId> prefix{rec.edges[0]};
        JointDist j = path_joint(m, prefix);
        PathState st = PathState::start(m, rec.edges[0]);
        for (std::size_t i = 1; i < rec.edges.size(); ++i) {
          st = st.extended(m, prefix, rec.edges[i]);
          prefix.push_back(rec.edges[i]);
          j = extend_joint(m, j, rec.edges[i]);
          const JointDist full = path_joint(m, prefix);
          ASSERT_TRUE(approx_equal(j, full)) << "seed " << seed;
          ASSERT_TRUE(approx_equal(st.cost(), to_cost(full))) << "seed " << seed;
          ASSERT_TRUE(approx_equal(direct_path_cost(m, prefix), to_cost(full))) << "seed " << seed;
        }
      }
    }
  }
}

TEST(GroundTruth, PaceMatchesEmpiricalEdgeDoesNot) {
  const auto ex = test::running_example();
  const WeightStore s = build_store(ex.net, parse_trajectories(kTrajectories, ex.net));
  const auto p = test::edges(ex.net, {"e1", "e4"});
  const Histogram truth({{14, 0.8}, {20, 0.2}});
  EXPECT_TRUE(approx_equal(to_cost(path_joint(CostModel(s, CostMode::Pace), p)), truth));
  const Histogram edge = to_cost(path_joint(CostModel(s, CostMode::Edge), p));
  EXPECT_GT(edge.prob_at(16), 0.0);
  EXPECT_GT(edge.prob_at(18), 0.0);
}
