#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spotar/solver.hpp"
#include "spotar/weights.hpp"

namespace spotar {

inline constexpr std::size_t kEnumerationLimit = 100000;

// All node-simple source->destination paths with at most `max_edges` edges,
// in depth-first order over edge ids. Throws EnumerationLimitError past `limit`.
std::vector<std::vector<EdgeId>> enumerate_simple_paths(const Network& net, const Query& q,
                                                        std::size_t max_edges = SIZE_MAX,
                                                        std::size_t limit = kEnumerationLimit);

// Maximal stored units of `path` found by scanning every sub-range; single
// edges fill positions no stored unit covers. Independent of coarsest_combination.
std::vector<UnitSpan> brute_force_units(const CostModel& model, std::span<const EdgeId> path);

// Path cost by direct composition of full joints over brute_force_units.
Histogram direct_path_cost(const CostModel& model, std::span<const EdgeId> path);

struct OracleResult {
  std::optional<std::vector<EdgeId>> path;
  double probability = 0.0;
  std::size_t paths_considered = 0;
};

// Exhaustive maximiser of P(cost <= budget); ties: fewer edges, then smaller edge ids.
OracleResult exact_spotar(const Network& net, const CostModel& model, const Query& q,
                          std::size_t limit = kEnumerationLimit);

// Samples path travel times unit by unit, each unit conditioned on the times
// it shares with the previous one; samples with no compatible row are rejected.
struct MonteCarloEstimate {
  double p = 0.0;
  double std_error = 0.0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
};
MonteCarloEstimate monte_carlo_cdf(const CostModel& model, std::span<const EdgeId> path,
                                   Time budget, std::size_t samples, std::uint64_t seed);

struct Instance {
  Network net;
  std::vector<TrajectoryRecord> trajectories;
};

// Reproducible random connected network with correlated synthetic
// trajectories; roughly `joint_fraction` of 2-3 edge sub-paths reach the
// default min_support.
Instance gen_instance(std::uint64_t seed, std::size_t nodes, double density, double joint_fraction);

// Random query on `net`: a reachable pair and a budget around its least
// travel time (occasionally below it, so that no path qualifies).
Query random_query(const Network& net, const WeightStore& store, std::uint64_t seed);

struct VerifyRow {
  std::uint64_t seed = 0;
  CostMode mode = CostMode::Pace;
  HeuristicKind heuristic = HeuristicKind::ShortestPathTree;
  Query query;
  double solver_p = 0.0;
  double oracle_p = 0.0;
  double path_p = 0.0;  // oracle evaluation of the solver's path
  std::size_t explored_edges = 0;
  bool ok = false;
  std::string error;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  std::size_t instances = 30;
  std::size_t max_nodes = 10;
  double tolerance = 1e-9;
};

// Solver against exact_spotar on random instances, for both cost models and
// both heuristics. Instance i uses seed `seed + i`.
std::vector<VerifyRow> verify_instances(const VerifyOptions& opts);

}  // namespace spotar
