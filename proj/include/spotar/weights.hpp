#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "spotar/dist.hpp"
#include "spotar/network.hpp"

namespace spotar {

// `count` identical traversals of `edges` with the given per-edge times.
struct TrajectoryRecord {
  std::vector<EdgeId> edges;
  std::vector<Time> times;
  std::int64_t count = 1;
};

// One line per record: `count,edge_id:time;edge_id:time;...`. Times are
// rounded to the network resolution (ties up) and clamped to >= resolution.
std::vector<TrajectoryRecord> parse_trajectories(std::string_view text, const Network& net,
                                                 const std::string& source = "<trajectories>");
std::vector<TrajectoryRecord> load_trajectories(const std::filesystem::path& file,
                                                const Network& net);
std::string format_trajectories(std::span<const TrajectoryRecord> records, const Network& net);

Time round_to_grid(double t, Time resolution);

struct StoreOptions {
  std::int64_t min_support = 10;
  std::size_t max_unit_edges = 8;
};

struct PathWeight {
  JointDist joint;
  std::int64_t support = 0;
};

namespace detail {
struct EdgeSeqHash {
  std::size_t operator()(const std::vector<EdgeId>& seq) const noexcept;
};
}  // namespace detail

// A weight unit (single edge or stored path) prepared for overlap fusion.
// conditional[o] maps the first `o` times of a row to the remaining times
// and P(row) / P(first o times).
struct FusionUnit {
  // Lexicographic order usable across vectors and spans.
  struct KeyLess {
    using is_transparent = void;
    template <class A, class B>
    bool operator()(const A& a, const B& b) const {
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
    }
  };
  using Tail = std::vector<std::pair<std::vector<Time>, double>>;
  std::vector<EdgeId> edges;
  std::vector<std::map<std::vector<Time>, Tail, KeyLess>> conditional;
};

// The weight function W: one histogram per edge plus joints for selected
// multi-edge paths. Immutable once built.
class WeightStore {
 public:
  WeightStore() = default;
  // Throws ValidationError when a histogram is missing, a path weight is not
  // a valid multi-edge path, its joint does not match, or its support is
  // below options.min_support.
  WeightStore(const Network& net, std::vector<Histogram> edge_weights, std::vector<bool> measured,
              std::vector<std::pair<std::vector<EdgeId>, PathWeight>> path_weights,
              StoreOptions options = {});

  std::size_t edge_count() const { return edge_weights_.size(); }
  Time resolution() const { return resolution_; }
  const StoreOptions& options() const { return options_; }

  const Histogram& edge_weight(EdgeId e) const { return edge_weights_[index_of(e)]; }
  bool measured(EdgeId e) const { return measured_[index_of(e)]; }
  std::size_t fallback_count() const;

  const std::map<std::vector<EdgeId>, PathWeight>& path_weights() const { return path_weights_; }
  const PathWeight* find_path_weight(std::span<const EdgeId> edges) const;

  // Least time the edge can take under any stored weight that covers it.
  Time min_edge_time(EdgeId e) const { return min_edge_time_[index_of(e)]; }

  // Longest stored unit, 1 when only edge weights exist.
  std::size_t longest_unit() const { return longest_unit_; }

  // True iff `edges` is a proper prefix of some stored multi-edge path.
  bool extends_into_unit(std::span<const EdgeId> edges) const;

  const FusionUnit& edge_unit(EdgeId e) const { return edge_units_[index_of(e)]; }
  const FusionUnit* path_unit(std::span<const EdgeId> edges) const;

 private:
  std::vector<Histogram> edge_weights_;
  std::vector<bool> measured_;
  std::map<std::vector<EdgeId>, PathWeight> path_weights_;
  std::vector<Time> min_edge_time_;
  std::vector<FusionUnit> edge_units_;
  std::unordered_map<std::vector<EdgeId>, FusionUnit, detail::EdgeSeqHash> path_units_;
  std::unordered_set<std::vector<EdgeId>, detail::EdgeSeqHash> proper_prefixes_;
  StoreOptions options_;
  std::size_t longest_unit_ = 1;
  Time resolution_ = 1;
};

WeightStore build_store(const Network& net, std::span<const TrajectoryRecord> trajectories,
                        StoreOptions options = {});

// Versioned JSON text; see docs/weight-store-format.md.
std::string format_store(const WeightStore& store, const Network& net);
WeightStore parse_store(std::string_view text, const Network& net,
                        const std::string& source = "<store>");
void save_store(const WeightStore& store, const Network& net, const std::filesystem::path& file);
WeightStore load_store(const std::filesystem::path& file, const Network& net);
// Time resolution recorded in a store file, so the network can be loaded to match.
Time store_resolution(const std::filesystem::path& file);

enum class CostMode { Edge, Pace };

std::string_view to_string(CostMode m);
CostMode parse_cost_mode(std::string_view s);

// W plus the rule for composing path distributions. EDGE ignores path
// weights and convolves; PACE composes the coarsest combination.
class CostModel {
 public:
  CostModel(const WeightStore& store, CostMode mode) : store_(&store), mode_(mode) {}

  const WeightStore& store() const { return *store_; }
  CostMode mode() const { return mode_; }
  // Longest unit the composition may use.
  std::size_t unit_cap() const { return mode_ == CostMode::Edge ? 1 : store_->longest_unit(); }

 private:
  const WeightStore* store_;
  CostMode mode_;
};

// Half-open position range [begin, end) of a unit inside a path.
struct UnitSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  friend bool operator==(const UnitSpan&, const UnitSpan&) = default;
};

// Coarsest covering of `path` by stored units: every maximal stored sub-path
// (one not contained in another stored sub-path of `path`), ordered by
// position. Consecutive units overlap or abut; single edges fill the gaps.
std::vector<UnitSpan> coarsest_combination(const WeightStore& store, std::span<const EdgeId> path,
                                           std::size_t unit_cap = SIZE_MAX);

JointDist path_joint(const CostModel& model, std::span<const EdgeId> path);
// path_joint of base.edges() + next, reusing `base` when the combination of
// the longer path keeps every unit of the shorter one.
JointDist extend_joint(const CostModel& model, const JointDist& base, EdgeId next);

// Joint over the first `covered` edges of a path where all but the last
// `window` edge times are lumped into a single prefix-sum column. Row keys
// are [prefix_sum, t_{covered-window}, ..., t_{covered-1}].
class WindowJoint {
 public:
  static WindowJoint empty(Time resolution);

  std::size_t covered() const { return covered_; }
  std::size_t window() const { return window_; }
  Time resolution() const { return resolution_; }

  // Rows sorted by key; each key has window() + 1 columns.
  std::size_t size() const { return probs_.size(); }
  std::size_t width() const { return window_ + 1; }
  std::span<const Time> key(std::size_t i) const {
    return {keys_.data() + i * width(), width()};
  }
  double prob(std::size_t i) const { return probs_[i]; }

  Histogram cost() const;
  Time min_total() const;

  // Overlap fusion with `unit` whose first `overlap` edges are the last
  // `overlap` covered edges. Keeps at most `keep_window` explicit columns.
  // Throws InconsistentWeightsError when no row pair agrees on the overlap.
  WindowJoint fuse(const FusionUnit& unit, std::size_t overlap, std::size_t keep_window) const;

 private:
  std::size_t covered_ = 0;
  std::size_t window_ = 0;
  std::vector<Time> keys_;
  std::vector<double> probs_;
  Time resolution_ = 1;
};

// Incremental path distribution used by the search. Keeps the folds of the
// trailing units of the current coarsest combination so that a longer stored
// unit can replace them exactly.
class PathState {
 public:
  struct Entry {
    UnitSpan span;
    WindowJoint fold;  // units up to and including this one
  };

  static PathState start(const CostModel& model, EdgeId first);
  // `path` is the edge sequence this state describes.
  PathState extended(const CostModel& model, std::span<const EdgeId> path, EdgeId next) const;

  const std::vector<Entry>& entries() const { return entries_; }
  const WindowJoint& joint() const { return entries_.back().fold; }
  Histogram cost() const { return joint().cost(); }

 private:
  std::vector<Entry> entries_;
};

}  // namespace spotar
