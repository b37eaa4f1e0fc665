#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "spotar/heuristic.hpp"
#include "spotar/weights.hpp"

namespace spotar {

// A search label: a path prefix from the source, its distribution state and
// the upper bound `r` on the on-time probability of any completion.
struct Label {
  double r = 0.0;
  std::vector<EdgeId> path;
  PathState state;
  Histogram cost;
  NodeId end_node{};
  // Lower bound on the prefix travel time, valid for every completion.
  Time min_time = 0;
  // A stored unit may still extend over the tail of this prefix.
  bool open = false;
};

// Upper bound and prefix minimum for `state`, ending at a node whose remaining
// minimum is `node_min`. For closed prefixes r is arrival_prob of the prefix cost.
struct LabelBound {
  double r = 0.0;
  Time min_time = 0;
  bool open = false;
};
LabelBound label_bound(const CostModel& model, std::span<const EdgeId> path,
                       const PathState& state, Time node_min, Time budget);

enum class DominanceVerdict { Keep, Drop, Replace };

struct DominanceResult {
  DominanceVerdict verdict = DominanceVerdict::Keep;
  std::vector<std::uint32_t> dominated;  // queued label ids the candidate replaces
};

// Max-priority queue of labels with per-node lookup. Order: larger r first,
// then fewer edges, then lexicographically smaller edge ids.
class LabelQueue {
 public:
  std::uint32_t push(Label label);
  Label pop_max();
  bool empty() const { return order_.empty(); }
  std::size_t size() const { return order_.size(); }
  double max_r() const;

  // Same-node stochastic dominance among queued labels. Only closed labels
  // are compared; identical costs drop the candidate.
  DominanceResult dominance_check(const Label& candidate) const;
  void remove(std::uint32_t id);

  // Removes every label with r < incumbent_r; returns how many.
  std::size_t purge_below(double incumbent_r);

  std::vector<const Label*> queued() const;
  std::vector<const Label*> queued_at(NodeId n) const;

 private:
  struct Key {
    double r;
    std::uint32_t id;
    const std::vector<EdgeId>* path;
  };
  struct KeyOrder {
    bool operator()(const Key& a, const Key& b) const;
  };
  std::deque<Label> slots_;
  std::vector<bool> alive_;
  std::set<Key, KeyOrder> order_;
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> by_node_;

  void unlink(std::uint32_t id);
};

struct TraceEvent {
  enum class Kind { Push, Pop, PruneMinCost, Dominated, Replaced, Incumbent, Purge, Terminate };
  Kind kind = Kind::Push;
  std::vector<EdgeId> path;
  double r = 0.0;
  // PruneMinCost: path_min + edge_min + node_min > budget.
  Time path_min = 0;
  Time edge_min = 0;
  Time node_min = 0;
  std::size_t removed = 0;
};

std::string_view to_string(TraceEvent::Kind k);

struct SolverOptions {
  bool dominance = true;
  bool record_trace = false;
};

struct SolveResult {
  std::vector<EdgeId> best_path;  // empty when no path can arrive in time
  double probability = 0.0;
  std::optional<Histogram> best_cost;
  std::size_t explored_edges = 0;
  std::size_t expanded_labels = 0;
  double wall_time_s = 0.0;
  std::vector<EdgeId> explored;  // sorted edge ids
  std::vector<TraceEvent> trace;

  bool found() const { return !best_path.empty(); }
};

SolveResult solve(const Network& net, const CostModel& model, const LowerBound& bound,
                  const Query& q, const SolverOptions& options = {});
// Builds the lower bound for `kind` first; its construction counts towards wall time.
SolveResult solve(const Network& net, const CostModel& model, HeuristicKind kind, const Query& q,
                  const SolverOptions& options = {});

}  // namespace spotar
