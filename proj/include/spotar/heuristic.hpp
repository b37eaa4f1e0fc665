#pragma once

#include <optional>
#include <string_view>
#include <unordered_map>

#include "spotar/dist.hpp"
#include "spotar/network.hpp"
#include "spotar/weights.hpp"

namespace spotar {

// Budget-bounded shortest-path tree rooted at `dest` on the reversed graph,
// with each edge weighted by its least possible travel time.
struct MinTree {
  NodeId dest{};
  Time budget = 0;
  std::unordered_map<std::uint32_t, Time> min_to_dest;
  // Original-graph edge leaving each tree node towards dest (absent for dest).
  std::unordered_map<std::uint32_t, EdgeId> next_edge;

  std::optional<Time> get(NodeId n) const;
  bool contains_edge(EdgeId e) const;
};

MinTree build_min_tree(const Network& net, const WeightStore& store, NodeId dest, Time budget);

enum class HeuristicKind { ShortestPathTree, Euclidean };

std::string_view to_string(HeuristicKind k);  // "SP" / "BA"
HeuristicKind parse_heuristic(std::string_view s);

// Lower bound on the remaining travel time to a fixed destination.
class LowerBound {
 public:
  static LowerBound shortest_path_tree(const Network& net, const WeightStore& store, NodeId dest,
                                       Time budget);
  // Straight-line distance over the network's maximum speed, floored to the grid.
  static LowerBound euclidean(const Network& net, NodeId dest);

  HeuristicKind kind() const { return kind_; }
  NodeId dest() const { return dest_; }
  // Absent when the node cannot reach dest within the tree's budget.
  std::optional<Time> get_min(NodeId n) const;
  const MinTree* tree() const { return tree_ ? &*tree_ : nullptr; }

 private:
  HeuristicKind kind_ = HeuristicKind::ShortestPathTree;
  NodeId dest_{};
  const Network* net_ = nullptr;
  std::optional<MinTree> tree_;
};

// 1 when `t` covers the remaining minimum, else 0.
inline double arrival_indicator(Time node_min, Time t) { return t >= node_min ? 1.0 : 0.0; }

// Sum over the histogram support of p * u(budget - k) for k <= budget.
double arrival_prob(const Histogram& path_cost, Time node_min, Time budget);

}  // namespace spotar
