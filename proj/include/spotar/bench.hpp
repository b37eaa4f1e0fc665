#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "spotar/oracle.hpp"
#include "spotar/solver.hpp"

namespace spotar {

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

struct Method {
  HeuristicKind heuristic = HeuristicKind::ShortestPathTree;
  CostMode mode = CostMode::Pace;
  std::string name() const;  // e.g. "SP+PACE"
  friend bool operator==(const Method&, const Method&) = default;
};
Method parse_method(std::string_view s);
std::vector<Method> all_methods();

struct DistanceBucket {
  double lo_km = 0.0;
  double hi_km = 0.0;
  friend bool operator==(const DistanceBucket&, const DistanceBucket&) = default;
};

inline const std::vector<Time> kTextBudgets{300, 500, 700, 1000};
inline const std::vector<Time> kFigureBudgets{400, 600, 800, 1000};

struct BenchConfig {
  std::vector<Time> budgets = kTextBudgets;
  std::vector<DistanceBucket> buckets;
  std::size_t queries_per_cell = 20;
  std::vector<Method> methods = all_methods();
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

// Throws ConfigError on broken invariants.
void validate_config(const BenchConfig& cfg);

// Flat `key = value` text, `#` comments. Required: buckets, queries_per_cell,
// methods, seed. Optional: budgets (default 300,500,700,1000), budget_set
// (text|figure), threads. See docs/bench-config.md.
BenchConfig parse_config(std::string_view text, const std::string& source = "<config>");
BenchConfig load_config(const std::filesystem::path& file);

struct BenchQuery {
  Time budget = 0;
  std::size_t bucket = 0;
  std::size_t query_id = 0;
  Query query;
};

// queries_per_cell pairs per (budget, bucket) cell, straight-line distance in
// the bucket. Throws ConfigError when a bucket cannot be filled.
std::vector<BenchQuery> gen_queries(const Network& net, const BenchConfig& cfg);

struct BenchRow {
  std::string method;
  Time budget = 0;
  double bucket_lo = 0.0;
  double bucket_hi = 0.0;
  std::size_t query_id = 0;
  double probability = 0.0;
  double wall_time_s = 0.0;
  std::size_t explored_edges = 0;
  std::size_t expanded_labels = 0;
  std::size_t path_edges = 0;
  friend bool operator==(const BenchRow&, const BenchRow&) = default;
};

// One row per method per query, sorted by (method, budget, bucket, query_id).
std::vector<BenchRow> run_bench(const Network& net, const WeightStore& store, const BenchConfig& cfg);
std::vector<BenchRow> run_bench(const Network& net, const WeightStore& store, const BenchConfig& cfg,
                                const std::vector<BenchQuery>& queries);

struct CellAggregate {
  std::string method;
  Time budget = 0;
  double bucket_lo = 0.0;
  double bucket_hi = 0.0;
  std::size_t n = 0;
  double mean_wall_time_s = 0.0;
  double sd_wall_time_s = 0.0;
  double mean_explored_edges = 0.0;
  double sd_explored_edges = 0.0;
  double mean_probability = 0.0;
};

// Mean and sample standard deviation per (method, budget, bucket).
std::vector<CellAggregate> aggregate(const std::vector<BenchRow>& rows);

inline constexpr std::string_view kBenchHeader =
    "method,budget,bucket_lo,bucket_hi,query_id,probability,wall_time_s,explored_edges,"
    "expanded_labels,path_edges";

std::string format_rows(const std::vector<BenchRow>& rows);
std::vector<BenchRow> parse_rows(std::string_view text, const std::string& source = "<bench csv>");
std::string format_aggregates(const std::vector<CellAggregate>& cells);

// Writes `file` and the per-cell aggregate next to it (`<stem>.agg.csv`).
// Returns the aggregate path.
std::filesystem::path emit_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& file);

struct GridOptions {
  std::size_t cols = 32;
  std::size_t rows = 32;
  double spacing_m = 130.0;
  std::size_t trips = 0;  // 0: five per edge
  Time resolution = 1;
};

// Synthetic bidirectional city grid (arterials every fourth line) with
// correlated trip trajectories, in seconds.
Instance gen_city_grid(std::uint64_t seed, const GridOptions& opts);

}  // namespace spotar
