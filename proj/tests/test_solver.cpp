#include <gtest/gtest.h>

#include <random>

#include "spotar/oracle.hpp"
#include "spotar/solver.hpp"
#include "support.hpp"

using namespace spotar;

namespace {

SolveResult run_example(HeuristicKind h, CostMode mode, Time budget, bool trace = true) {
  static const auto ex = test::running_example();
  SolverOptions o;
  o.record_trace = trace;
  const Query q{ex.net.node_by_name("s"), ex.net.node_by_name("d"), budget};
  return solve(ex.net, CostModel(ex.store, mode), h, q, o);
}

const TraceEvent* find_event(const SolveResult& r, TraceEvent::Kind k, const std::vector<EdgeId>& path) {
  for (const auto& ev : r.trace)
    if (ev.kind == k && ev.path == path) return &ev;
  return nullptr;
}

Label make(double r, std::vector<EdgeId> path, NodeId end, Histogram cost, bool open = false) {
  Label l;
  l.r = r;
  l.path = std::move(path);
  l.end_node = end;
  l.cost = std::move(cost);
  l.open = open;
  return l;
}

}  // namespace

TEST(Solve, RunningExampleGolden) {
  const auto ex = test::running_example();
  const SolveResult r = run_example(HeuristicKind::ShortestPathTree, CostMode::Pace, 22);
  EXPECT_EQ(test::names(ex.net, r.best_path), "<e2,e6,e9>");
  EXPECT_NEAR(r.probability, 0.70, 1e-9);
  ASSERT_TRUE(r.best_cost);
  EXPECT_TRUE(approx_equal(*r.best_cost, Histogram({{18, 0.28}, {22, 0.42}, {25, 0.12}, {29, 0.18}})));

  std::vector<double> incumbents;
  for (const auto& ev : r.trace)
    if (ev.kind == TraceEvent::Kind::Incumbent) incumbents.push_back(ev.r);
  ASSERT_EQ(incumbents.size(), 2u);
  EXPECT_NEAR(incumbents[0], 0.32, 1e-9);
  EXPECT_NEAR(incumbents[1], 0.70, 1e-9);
  EXPECT_NE(find_event(r, TraceEvent::Kind::Incumbent, test::edges(ex.net, {"e1", "e4", "e9"})), nullptr);
  EXPECT_EQ(r.explored_edges, 8u);
  EXPECT_EQ(r.expanded_labels, 4u);
}

TEST(Solve, PruningGoldens) {
  const auto ex = test::running_example();
  const SolveResult r = run_example(HeuristicKind::ShortestPathTree, CostMode::Pace, 22);
  const TraceEvent* a = find_event(r, TraceEvent::Kind::PruneMinCost, test::edges(ex.net, {"e1", "e5"}));
  ASSERT_NE(a, nullptr);
  EXPECT_EQ(a->path_min + a->edge_min, 16);
  EXPECT_EQ(a->node_min, 8);
  const TraceEvent* b = find_event(r, TraceEvent::Kind::PruneMinCost, test::edges(ex.net, {"e2", "e3"}));
  ASSERT_NE(b, nullptr);
  EXPECT_EQ(b->path_min, 8);
  EXPECT_EQ(b->edge_min, 11);
  EXPECT_EQ(b->node_min, 11);
  EXPECT_EQ(find_event(r, TraceEvent::Kind::Push, test::edges(ex.net, {"e1", "e5"})), nullptr);
}

TEST(Solve, SurvivesPurgeAfterFirstIncumbent) {
  const SolveResult r = run_example(HeuristicKind::ShortestPathTree, CostMode::Pace, 22);
  bool first = true;
  for (const auto& ev : r.trace)
    if (ev.kind == TraceEvent::Kind::Purge && first) {
      EXPECT_NEAR(ev.r, 0.32, 1e-12);
      EXPECT_EQ(ev.removed, 0u);
      first = false;
    }
  EXPECT_FALSE(first);
}

TEST(Solve, InfeasibleBudget) {
  for (HeuristicKind h : {HeuristicKind::ShortestPathTree, HeuristicKind::Euclidean}) {
    const SolveResult r = run_example(h, CostMode::Pace, 1);
    EXPECT_FALSE(r.found());
    EXPECT_EQ(r.probability, 0.0);
  }
  EXPECT_EQ(run_example(HeuristicKind::ShortestPathTree, CostMode::Pace, 17).explored_edges, 0u);
}

TEST(Solve, EdgeModelMatchesOracle) {
  const auto ex = test::running_example();
  const CostModel edge(ex.store, CostMode::Edge);
  const Query q{ex.net.node_by_name("s"), ex.net.node_by_name("d"), 22};
  const OracleResult o = exact_spotar(ex.net, edge, q);
  const SolveResult r = run_example(HeuristicKind::ShortestPathTree, CostMode::Edge, 22, false);
  EXPECT_NEAR(r.probability, o.probability, 1e-9);
}

TEST(Solve, HeuristicsAgree) {
  for (Time t = 15; t <= 40; ++t)
    for (CostMode m : {CostMode::Pace, CostMode::Edge}) {
      const SolveResult sp = run_example(HeuristicKind::ShortestPathTree, m, t, false);
      const SolveResult ba = run_example(HeuristicKind::Euclidean, m, t, false);
      EXPECT_NEAR(sp.probability, ba.probability, 1e-12) << t;
      EXPECT_LE(sp.explored_edges, ba.explored_edges) << t;
    }
}

TEST(Solve, OracleEquivalence) {
  VerifyOptions o;
  o.seed = 1000;
  o.instances = 30;
  for (const VerifyRow& row : verify_instances(o))
    EXPECT_TRUE(row.ok) << "seed " << row.seed << ' ' << to_string(row.mode) << ' '
                        << to_string(row.heuristic) << ": " << row.error;
}

TEST(Solve, SearchSpaceOrdering) {
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const Instance inst = gen_instance(seed, 10, 0.35, 0.6);
    const WeightStore s = build_store(inst.net, inst.trajectories);
    const Query q = random_query(inst.net, s, seed);
    for (CostMode m : {CostMode::Pace, CostMode::Edge}) {
      const CostModel model(s, m);
      const SolveResult sp = solve(inst.net, model, HeuristicKind::ShortestPathTree, q);
      const SolveResult ba = solve(inst.net, model, HeuristicKind::Euclidean, q);
      EXPECT_LE(sp.explored_edges, ba.explored_edges) << "seed " << seed;
      EXPECT_NEAR(sp.probability, ba.probability, 1e-9) << "seed " << seed;
    }
  }
}

TEST(Dominance, IncomparableKeepsBoth) {
  LabelQueue q;
  const auto node = NodeId(3);
  q.push(make(0.8, {EdgeId(0), EdgeId(3)}, node, Histogram({{14, 0.8}, {20, 0.2}})));
  const Label cand = make(0.7, {EdgeId(1), EdgeId(5)}, node, Histogram({{13, 0.7}, {20, 0.3}}));
  EXPECT_EQ(q.dominance_check(cand).verdict, DominanceVerdict::Keep);
}

TEST(Dominance, IdenticalCostDropsCandidate) {
  LabelQueue q;
  const auto node = NodeId(3);
  q.push(make(0.8, {EdgeId(0)}, node, Histogram({{14, 0.8}, {20, 0.2}})));
  EXPECT_EQ(q.dominance_check(make(0.8, {EdgeId(1)}, node, Histogram({{14, 0.8}, {20, 0.2}}))).verdict,
            DominanceVerdict::Drop);
}

TEST(Dominance, ReplaceAndDrop) {
  LabelQueue q;
  const auto node = NodeId(3);
  const auto id = q.push(make(0.5, {EdgeId(0)}, node, Histogram({{14, 0.5}, {20, 0.5}})));
  const auto better = q.dominance_check(make(0.6, {EdgeId(1)}, node, Histogram({{14, 0.6}, {20, 0.4}})));
  EXPECT_EQ(better.verdict, DominanceVerdict::Replace);
  EXPECT_EQ(better.dominated, std::vector<std::uint32_t>{id});
  EXPECT_EQ(q.dominance_check(make(0.4, {EdgeId(1)}, node, Histogram({{15, 0.5}, {20, 0.5}}))).verdict,
            DominanceVerdict::Drop);
  // Other nodes never interact.
  EXPECT_EQ(q.dominance_check(make(0.4, {EdgeId(1)}, NodeId(4), Histogram({{15, 0.5}, {20, 0.5}}))).verdict,
            DominanceVerdict::Keep);
}

TEST(Dominance, QueueNeverHoldsDominatedPair) {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 20; ++round) {
    LabelQueue q;
    for (std::uint32_t i = 0; i < 200; ++i) {
      const auto node = NodeId(static_cast<std::uint32_t>(rng() % 4));
      const Histogram c = test::random_histogram(rng, 2, 1, 6);
      Label l = make(c.cdf(4), {EdgeId(i)}, node, c);
      const DominanceResult v = q.dominance_check(l);
      if (v.verdict == DominanceVerdict::Drop) continue;
      for (auto id : v.dominated) q.remove(id);
      q.push(std::move(l));
    }
    const auto all = q.queued();
    for (const Label* a : all)
      for (const Label* b : all)
        if (a != b && a->end_node == b->end_node) {
          EXPECT_FALSE(dominates(a->cost, b->cost));
          EXPECT_FALSE(a->cost == b->cost);
        }
  }
}

TEST(Purge, RemovesExactlyBelowIncumbent) {
  std::mt19937_64 rng(41);
  for (int round = 0; round < 50; ++round) {
    LabelQueue q;
    std::vector<double> rs;
    for (std::uint32_t i = 0; i < 40; ++i) {
      const double r = std::uniform_real_distribution<double>(0, 1)(rng);
      rs.push_back(r);
      q.push(make(r, {EdgeId(i)}, NodeId(i), Histogram::point_mass(1)));
    }
    const double inc = std::uniform_real_distribution<double>(0, 1)(rng);
    const auto below = std::count_if(rs.begin(), rs.end(), [&](double r) { return r < inc; });
    EXPECT_EQ(q.purge_below(inc), static_cast<std::size_t>(below));
    double last = 2.0;
    while (!q.empty()) {
      const Label l = q.pop_max();
      EXPECT_GE(l.r, inc);
      EXPECT_LE(l.r, last);
      last = l.r;
    }
  }
  LabelQueue q;
  q.push(make(0.0, {EdgeId(0)}, NodeId(0), Histogram::point_mass(1)));
  EXPECT_EQ(q.purge_below(0.0), 0u);
}

TEST(Queue, TieOrder) {
  LabelQueue q;
  q.push(make(1.0, {EdgeId(1)}, NodeId(2), Histogram::point_mass(1)));
  q.push(make(1.0, {EdgeId(0), EdgeId(4)}, NodeId(3), Histogram::point_mass(1)));
  q.push(make(1.0, {EdgeId(0)}, NodeId(1), Histogram::point_mass(1)));
  EXPECT_EQ(q.pop_max().path, std::vector<EdgeId>{EdgeId(0)});
  EXPECT_EQ(q.pop_max().path, std::vector<EdgeId>{EdgeId(1)});
  EXPECT_EQ(q.pop_max().path.size(), 2u);
}
