#include "spotar/solver.hpp"

#include <algorithm>
#include <chrono>
#include <numeric>

namespace spotar {

namespace {

Time row_sum(std::span<const Time> key) { return std::accumulate(key.begin(), key.end(), Time{0}); }

// P(sum <= limit) over rows, optionally conditioned on the last `cond_cols`
// explicit columns; returns the largest conditional probability.
double max_conditional_cdf(const WindowJoint& joint, std::size_t cond_cols, Time limit) {
  if (cond_cols == 0) {
    double ok = 0.0;
    for (std::size_t i = 0; i < joint.size(); ++i)
      if (row_sum(joint.key(i)) <= limit) ok += joint.prob(i);
    return ok;
  }
  std::vector<std::size_t> order(joint.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto group = [&](std::size_t i) { return joint.key(i).last(cond_cols); };
  auto less = [&](std::size_t a, std::size_t b) {
    const auto x = group(a), y = group(b);
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
  };
  std::sort(order.begin(), order.end(), less);
  double best = 0.0;
  for (std::size_t lo = 0; lo < order.size();) {
    double total = 0.0, ok = 0.0;
    std::size_t hi = lo;
    for (; hi < order.size() && !less(order[lo], order[hi]); ++hi) {
      total += joint.prob(order[hi]);
      if (row_sum(joint.key(order[hi])) <= limit) ok += joint.prob(order[hi]);
    }
    best = std::max(best, ok / total);
    lo = hi;
  }
  return best;
}

#ifdef SPOTAR_MUTATION_INVERT_DOMINANCE
// Deliberately wrong; `spotar verify` must catch it.
bool label_dominates(const Histogram& a, const Histogram& b) { return dominates(b, a); }
#else
bool label_dominates(const Histogram& a, const Histogram& b) { return dominates(a, b); }
#endif

}  // namespace

LabelBound label_bound(const CostModel& model, std::span<const EdgeId> path,
                       const PathState& state, Time node_min, Time budget) {
  LabelBound out;
  const WindowJoint& top = state.joint();
  out.min_time = top.min_total();
  if (node_min >= kInfiniteTime) return out;
  out.r = max_conditional_cdf(top, 0, budget - node_min);

  const WeightStore& store = model.store();
  const std::size_t cap = model.unit_cap();
  const std::size_t n = path.size();
  for (std::size_t k = 1; k < cap && k <= n; ++k) {
    if (!store.extends_into_unit(path.last(k))) continue;
    out.open = true;
    // A later unit starting at n - k would be fused onto the fold of the
    // units that start before it, reweighting that fold by the overlap times.
    const std::size_t start = n - k;
    const WindowJoint* fold = nullptr;
    for (const auto& e : state.entries())
      if (e.span.begin < start) fold = &e.fold;
    const WindowJoint empty = WindowJoint::empty(store.resolution());
    if (!fold) fold = &empty;
    const std::size_t covered = fold->covered();
    Time rest_min = 0;
    for (std::size_t j = covered; j < n; ++j) rest_min += store.min_edge_time(path[j]);
    const std::size_t overlap = covered > start ? covered - start : 0;
    out.r = std::max(out.r, max_conditional_cdf(*fold, overlap, budget - node_min - rest_min));
    out.min_time = std::min(out.min_time, fold->min_total() + rest_min);
  }
  out.r = std::min(out.r, 1.0);
  return out;
}

bool LabelQueue::KeyOrder::operator()(const Key& a, const Key& b) const {
  if (a.r != b.r) return a.r > b.r;
  if (a.path->size() != b.path->size()) return a.path->size() < b.path->size();
  if (*a.path != *b.path) return *a.path < *b.path;
  return a.id < b.id;
}

std::uint32_t LabelQueue::push(Label label) {
  const auto id = static_cast<std::uint32_t>(slots_.size());
  slots_.push_back(std::move(label));
  alive_.push_back(true);
  const Label& l = slots_.back();
  order_.insert(Key{l.r, id, &l.path});
  by_node_[index_of(l.end_node)].push_back(id);
  return id;
}

void LabelQueue::unlink(std::uint32_t id) {
  Label& l = slots_[id];
  order_.erase(Key{l.r, id, &l.path});
  auto& ids = by_node_[index_of(l.end_node)];
  ids.erase(std::find(ids.begin(), ids.end(), id));
  alive_[id] = false;
}

Label LabelQueue::pop_max() {
  const std::uint32_t id = order_.begin()->id;
  unlink(id);
  return std::move(slots_[id]);
}

double LabelQueue::max_r() const { return order_.empty() ? 0.0 : order_.begin()->r; }

void LabelQueue::remove(std::uint32_t id) {
  if (id >= alive_.size() || !alive_[id]) return;
  unlink(id);
  slots_[id] = Label{};
}

DominanceResult LabelQueue::dominance_check(const Label& candidate) const {
  DominanceResult res;
  if (candidate.open) return res;
  auto it = by_node_.find(index_of(candidate.end_node));
  if (it == by_node_.end()) return res;
  for (std::uint32_t id : it->second) {
    const Label& other = slots_[id];
    if (other.open) continue;
    if (approx_equal(other.cost, candidate.cost, 0.0) || label_dominates(other.cost, candidate.cost)) {
      res.verdict = DominanceVerdict::Drop;
      res.dominated.clear();
      return res;
    }
    if (label_dominates(candidate.cost, other.cost)) res.dominated.push_back(id);
  }
  if (!res.dominated.empty()) res.verdict = DominanceVerdict::Replace;
  return res;
}

std::size_t LabelQueue::purge_below(double incumbent_r) {
  std::vector<std::uint32_t> doomed;
  for (auto it = order_.rbegin(); it != order_.rend() && it->r < incumbent_r; ++it)
    doomed.push_back(it->id);
  for (std::uint32_t id : doomed) remove(id);
  return doomed.size();
}

std::vector<const Label*> LabelQueue::queued() const {
  std::vector<const Label*> out;
  for (const Key& k : order_) out.push_back(&slots_[k.id]);
  return out;
}

std::vector<const Label*> LabelQueue::queued_at(NodeId n) const {
  std::vector<const Label*> out;
  auto it = by_node_.find(index_of(n));
  if (it == by_node_.end()) return out;
  for (std::uint32_t id : it->second) out.push_back(&slots_[id]);
  return out;
}

std::string_view to_string(TraceEvent::Kind k) {
  switch (k) {
    case TraceEvent::Kind::Push: return "push";
    case TraceEvent::Kind::Pop: return "pop";
    case TraceEvent::Kind::PruneMinCost: return "prune-min-cost";
    case TraceEvent::Kind::Dominated: return "dominated";
    case TraceEvent::Kind::Replaced: return "replaced";
    case TraceEvent::Kind::Incumbent: return "incumbent";
    case TraceEvent::Kind::Purge: return "purge";
    case TraceEvent::Kind::Terminate: return "terminate";
  }
  return "?";
}

namespace {

class Search {
 public:
  Search(const Network& net, const CostModel& model, const LowerBound& bound, const Query& q,
         const SolverOptions& options, SolveResult& out)
      : net_(net), model_(model), bound_(bound), q_(q), options_(options), out_(out),
        explored_(net.edge_count(), false) {}

  void run() {
    const Time source_min = node_min(q_.source);
    if (source_min > q_.budget) return;

    for (EdgeId e : net_.out_edges(q_.source)) {
      const NodeId w = net_.edge(e).to;
      if (w == q_.source) continue;
      std::vector<EdgeId> path{e};
      if (!admissible(path, 0, e, w)) continue;
      consider(make_label(std::move(path), PathState::start(model_, e), w), false);
    }

    while (!queue_.empty()) {
      Label label = queue_.pop_max();
      ++out_.expanded_labels;
      record(TraceEvent::Kind::Pop, label.path, label.r);
      if (label.r <= best_r_) {
        record(TraceEvent::Kind::Terminate, label.path, label.r);
        break;
      }
      const std::vector<NodeId> visited = nodes_of(label.path);
      for (EdgeId e : net_.out_edges(label.end_node)) {
        const NodeId w = net_.edge(e).to;
        if (std::find(visited.begin(), visited.end(), w) != visited.end()) continue;
        std::vector<EdgeId> path = label.path;
        path.push_back(e);
        if (!admissible(path, label.min_time, e, w)) continue;
        PathState state = label.state.extended(model_, label.path, e);
        consider(make_label(std::move(path), std::move(state), w), true);
      }
    }
  }

  void finish() {
    for (std::size_t i = 0; i < explored_.size(); ++i)
      if (explored_[i]) out_.explored.push_back(EdgeId(i));
    out_.explored_edges = out_.explored.size();
  }

 private:
  const Network& net_;
  const CostModel& model_;
  const LowerBound& bound_;
  const Query& q_;
  const SolverOptions& options_;
  SolveResult& out_;
  LabelQueue queue_;
  std::vector<bool> explored_;
  double best_r_ = 0.0;

  Time node_min(NodeId n) const { return bound_.get_min(n).value_or(kInfiniteTime); }

  std::vector<NodeId> nodes_of(const std::vector<EdgeId>& path) const {
    std::vector<NodeId> nodes{q_.source};
    for (EdgeId e : path) nodes.push_back(net_.edge(e).to);
    return nodes;
  }

  void record(TraceEvent::Kind kind, const std::vector<EdgeId>& path, double r) {
    if (!options_.record_trace) return;
    TraceEvent ev;
    ev.kind = kind;
    ev.path = path;
    ev.r = r;
    out_.trace.push_back(std::move(ev));
  }

  // Budget check: prefix minimum + edge minimum + remaining minimum.
  bool admissible(const std::vector<EdgeId>& path, Time path_min, EdgeId e, NodeId w) {
    explored_[index_of(e)] = true;
    const Time edge_min = model_.store().min_edge_time(e);
    const Time rest = node_min(w);
    if (rest < kInfiniteTime && path_min + edge_min + rest <= q_.budget) return true;
    if (options_.record_trace) {
      TraceEvent ev;
      ev.kind = TraceEvent::Kind::PruneMinCost;
      ev.path = path;
      ev.path_min = path_min;
      ev.edge_min = edge_min;
      ev.node_min = rest;
      out_.trace.push_back(std::move(ev));
    }
    return false;
  }

  Label make_label(std::vector<EdgeId> path, PathState state, NodeId end) const {
    Label l;
    const LabelBound b = label_bound(model_, path, state, node_min(end), q_.budget);
    l.r = b.r;
    l.min_time = b.min_time;
    l.open = b.open;
    l.cost = state.cost();
    l.path = std::move(path);
    l.state = std::move(state);
    l.end_node = end;
    return l;
  }

  void consider(Label label, bool check_dominance) {
    if (label.end_node == q_.destination) {
      const double prob = label.cost.cdf(q_.budget);
      if (prob > best_r_) {
        best_r_ = prob;
        out_.best_path = label.path;
        out_.probability = prob;
        out_.best_cost = label.cost;
        record(TraceEvent::Kind::Incumbent, label.path, prob);
        const std::size_t removed = queue_.purge_below(best_r_);
        if (options_.record_trace) {
          TraceEvent ev;
          ev.kind = TraceEvent::Kind::Purge;
          ev.r = best_r_;
          ev.removed = removed;
          out_.trace.push_back(std::move(ev));
        }
      }
      return;
    }
    if (label.r < best_r_ || label.r <= 0.0) return;
    if (check_dominance && options_.dominance) {
      DominanceResult d = queue_.dominance_check(label);
      if (d.verdict == DominanceVerdict::Drop) {
        record(TraceEvent::Kind::Dominated, label.path, label.r);
        return;
      }
      for (std::uint32_t id : d.dominated) {
        record(TraceEvent::Kind::Replaced, label.path, label.r);
        queue_.remove(id);
      }
    }
    record(TraceEvent::Kind::Push, label.path, label.r);
    queue_.push(std::move(label));
  }
};

}  // namespace

SolveResult solve(const Network& net, const CostModel& model, const LowerBound& bound,
                  const Query& q, const SolverOptions& options) {
  validate_query(net, q);
  if (bound.dest() != q.destination) throw ValidationError("lower bound built for another destination");
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult out;
  Search search(net, model, bound, q, options, out);
  search.run();
  search.finish();
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

SolveResult solve(const Network& net, const CostModel& model, HeuristicKind kind, const Query& q,
                  const SolverOptions& options) {
  validate_query(net, q);
  const auto t0 = std::chrono::steady_clock::now();
  const LowerBound bound = kind == HeuristicKind::ShortestPathTree
                               ? LowerBound::shortest_path_tree(net, model.store(), q.destination, q.budget)
                               : LowerBound::euclidean(net, q.destination);
  SolveResult out = solve(net, model, bound, q, options);
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

}  // namespace spotar
