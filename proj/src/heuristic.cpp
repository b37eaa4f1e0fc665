#include "spotar/heuristic.hpp"

#include <cmath>
#include <functional>
#include <queue>

namespace spotar {

std::optional<Time> MinTree::get(NodeId n) const {
  auto it = min_to_dest.find(index_of(n));
  if (it == min_to_dest.end()) return std::nullopt;
  return it->second;
}

bool MinTree::contains_edge(EdgeId e) const {
  for (const auto& kv : next_edge)
    if (kv.second == e) return true;
  return false;
}

MinTree build_min_tree(const Network& net, const WeightStore& store, NodeId dest, Time budget) {
  if (index_of(dest) >= net.node_count()) throw ValidationError("unknown destination node");
  MinTree tree;
  tree.dest = dest;
  tree.budget = budget;
  if (budget < 0) return tree;

  // Incoming edges of the original graph are the outgoing edges of the reversed one.
  std::vector<std::vector<EdgeId>> incoming(net.node_count());
  for (std::size_t i = 0; i < net.edge_count(); ++i)
    incoming[index_of(net.edges()[i].to)].push_back(EdgeId(i));

  std::vector<Time> dist(net.node_count(), kInfiniteTime);
  std::vector<bool> settled(net.node_count(), false);
  using Item = std::pair<Time, std::uint32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  dist[index_of(dest)] = 0;
  open.emplace(0, index_of(dest));
  while (!open.empty()) {
    auto [d, v] = open.top();
    open.pop();
    if (settled[v] || d != dist[v]) continue;
    if (d > budget) break;
    settled[v] = true;
    tree.min_to_dest.emplace(v, d);
    for (EdgeId e : incoming[v]) {
      const std::uint32_t u = index_of(net.edge(e).from);
      const Time nd = d + store.min_edge_time(e);
      if (!settled[u] && nd < dist[u]) {
        dist[u] = nd;
        tree.next_edge[u] = e;
        open.emplace(nd, u);
      }
    }
  }
  std::erase_if(tree.next_edge, [&](const auto& kv) { return !settled[kv.first]; });
  return tree;
}

std::string_view to_string(HeuristicKind k) {
  return k == HeuristicKind::ShortestPathTree ? "SP" : "BA";
}

HeuristicKind parse_heuristic(std::string_view s) {
  if (s == "sp" || s == "SP") return HeuristicKind::ShortestPathTree;
  if (s == "ba" || s == "BA") return HeuristicKind::Euclidean;
  throw ValidationError("unknown heuristic '" + std::string(s) + "' (expected sp|ba)");
}

LowerBound LowerBound::shortest_path_tree(const Network& net, const WeightStore& store,
                                          NodeId dest, Time budget) {
  LowerBound lb;
  lb.kind_ = HeuristicKind::ShortestPathTree;
  lb.dest_ = dest;
  lb.net_ = &net;
  lb.tree_ = build_min_tree(net, store, dest, budget);
  return lb;
}

LowerBound LowerBound::euclidean(const Network& net, NodeId dest) {
  if (index_of(dest) >= net.node_count()) throw ValidationError("unknown destination node");
  LowerBound lb;
  lb.kind_ = HeuristicKind::Euclidean;
  lb.dest_ = dest;
  lb.net_ = &net;
  return lb;
}

std::optional<Time> LowerBound::get_min(NodeId n) const {
  if (index_of(n) >= net_->node_count()) throw ValidationError("unknown node");
  if (tree_) return tree_->get(n);
  const double t = net_->distance_m(n, dest_) / net_->max_speed();
  const Time res = net_->resolution();
  return static_cast<Time>(std::floor(t / static_cast<double>(res))) * res;
}

double arrival_prob(const Histogram& path_cost, Time node_min, Time budget) {
  double r = 0.0;
  for (const auto& [k, p] : path_cost.entries()) {
    if (k > budget) break;
    r += p * arrival_indicator(node_min, budget - k);
  }
  return std::min(r, 1.0);
}

}  // namespace spotar
