#include <gtest/gtest.h>

#include <queue>
#include <random>

#include "spotar/heuristic.hpp"
#include "spotar/oracle.hpp"
#include "support.hpp"

using namespace spotar;

namespace {

// Plain Dijkstra on least edge times from every node to dest.
std::vector<Time> all_minima(const Network& net, const WeightStore& s, NodeId dest) {
  std::vector<Time> d(net.node_count(), kInfiniteTime);
  const Network rev = net.reversed();
  using Item = std::pair<Time, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  d[index_of(dest)] = 0;
  pq.push({0, index_of(dest)});
  while (!pq.empty()) {
    auto [t, v] = pq.top();
    pq.pop();
    if (t != d[v]) continue;
    for (EdgeId e : rev.out_edges(NodeId(v))) {
      const std::uint32_t w = index_of(rev.edge(e).to);
      const Time nt = t + min_cost(s.edge_weight(e));
      if (nt < d[w]) pq.push({d[w] = nt, w});
    }
  }
  return d;
}

}  // namespace

TEST(MinTree, RunningExampleValues) {
  const auto ex = test::running_example();
  const NodeId d = ex.net.node_by_name("d");
  const LowerBound sp = LowerBound::shortest_path_tree(ex.net, ex.store, d, 22);
  EXPECT_EQ(sp.get_min(ex.net.node_by_name("e")), 11);
  EXPECT_EQ(sp.get_min(ex.net.node_by_name("q")), 5);
  EXPECT_EQ(sp.get_min(ex.net.node_by_name("r")), 10);
  EXPECT_EQ(sp.get_min(d), 0);
}

TEST(MinTree, BudgetCutsTree) {
  const auto ex = test::running_example();
  const NodeId d = ex.net.node_by_name("d"), s = ex.net.node_by_name("s");
  const EdgeId e2 = ex.net.edge_by_name("e2");
  const MinTree t20 = build_min_tree(ex.net, ex.store, d, 20);
  EXPECT_TRUE(t20.contains_edge(e2));
  EXPECT_EQ(t20.get(s), 18);
  const MinTree t15 = build_min_tree(ex.net, ex.store, d, 15);
  EXPECT_FALSE(t15.contains_edge(e2));
  EXPECT_FALSE(t15.get(s).has_value());
}

TEST(MinTree, ZeroBudget) {
  const auto ex = test::running_example();
  const NodeId d = ex.net.node_by_name("d");
  const MinTree t = build_min_tree(ex.net, ex.store, d, 0);
  EXPECT_EQ(t.min_to_dest.size(), 1u);
  EXPECT_EQ(t.get(d), 0);
}

TEST(MinTree, TreeInvariant) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Instance inst = gen_instance(seed, 10, 0.35, 0.5);
    const WeightStore s = build_store(inst.net, inst.trajectories);
    const MinTree t = build_min_tree(inst.net, s, NodeId(0), 60);
    for (const auto& [v, m] : t.min_to_dest) {
      EXPECT_LE(m, 60);
      if (NodeId(v) == t.dest) continue;
      const EdgeId e = t.next_edge.at(v);
      EXPECT_EQ(m, s.min_edge_time(e) + *t.get(inst.net.edge(e).to));
    }
  }
}

TEST(Heuristic, BaZeroAtDest) {
  const auto ex = test::running_example();
  const NodeId d = ex.net.node_by_name("d");
  EXPECT_EQ(LowerBound::euclidean(ex.net, d).get_min(d), 0);
}

TEST(Heuristic, AdmissibleAndOrdered) {
  std::mt19937_64 rng(77);
  std::size_t samples = 0;
  for (std::uint64_t seed = 1; samples < 1000; ++seed) {
    const Instance inst = gen_instance(seed, 9, 0.35, 0.5);
    const WeightStore s = build_store(inst.net, inst.trajectories);
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(inst.net.node_count() - 1));
    const auto dest = NodeId(pick(rng));
    const auto truth = all_minima(inst.net, s, dest);
    const LowerBound ba = LowerBound::euclidean(inst.net, dest);
    for (int k = 0; k < 10; ++k, ++samples) {
      const auto v = NodeId(pick(rng));
      const Time budget = std::uniform_int_distribution<Time>(0, 120)(rng);
      const LowerBound sp = LowerBound::shortest_path_tree(inst.net, s, dest, budget);
      const auto spv = sp.get_min(v);
      if (truth[index_of(v)] <= budget) {
        ASSERT_TRUE(spv.has_value());
        EXPECT_EQ(*spv, truth[index_of(v)]);
      } else {
        EXPECT_FALSE(spv.has_value());
      }
      if (spv) EXPECT_LE(*ba.get_min(v), *spv);
    }
  }
}

TEST(Indicator, Boundary) {
  EXPECT_EQ(arrival_indicator(11, 11), 1.0);
  EXPECT_EQ(arrival_indicator(11, 10), 0.0);
  EXPECT_EQ(arrival_indicator(0, 0), 1.0);
}

TEST(ArrivalProb, Goldens) {
  EXPECT_NEAR(arrival_prob(Histogram({{14, 0.8}, {20, 0.2}}), 5, 22), 0.8, 1e-12);
  EXPECT_NEAR(arrival_prob(Histogram({{13, 0.7}, {20, 0.3}}), 5, 22), 0.7, 1e-12);
  EXPECT_NEAR(arrival_prob(Histogram({{8, 0.9}, {10, 0.1}}), 11, 22), 1.0, 1e-12);
}

TEST(ArrivalProb, Monotone) {
  std::mt19937_64 rng(4);
  for (int it = 0; it < 200; ++it) {
    const Histogram h = test::random_histogram(rng, 5);
    EXPECT_NEAR(arrival_prob(h, 0, 20), h.cdf(20), 1e-12);
    for (Time t = 1; t < 40; ++t) EXPECT_LE(arrival_prob(h, 3, t - 1), arrival_prob(h, 3, t) + 1e-12);
    for (Time m = 1; m < 20; ++m) EXPECT_GE(arrival_prob(h, m - 1, 25) + 1e-12, arrival_prob(h, m, 25));
  }
}
