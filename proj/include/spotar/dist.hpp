#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spotar/types.hpp"

namespace spotar {

inline constexpr double kMassTolerance = 1e-9;

// Discrete travel-time distribution on the grid {k * resolution}.
// Entries are sorted by time, strictly positive, and sum to 1 within 1e-9.
class Histogram {
 public:
  using Entry = std::pair<Time, double>;

  Histogram() = default;
  // Validates: times >= 0 on the grid, probabilities >= 0, total within 1e-9
  // of 1. Duplicate times are merged and zero entries dropped.
  explicit Histogram(std::vector<Entry> entries, Time resolution = 1);

  // Any positive weights; rescaled to unit mass.
  static Histogram from_weights(std::vector<Entry> weights, Time resolution = 1);
  static Histogram point_mass(Time t, Time resolution = 1);

  const std::vector<Entry>& entries() const { return entries_; }
  Time resolution() const { return resolution_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  Time min_time() const { return entries_.front().first; }
  Time max_time() const { return entries_.back().first; }
  double prob_at(Time t) const;
  double cdf(Time t) const;  // P(X <= t)
  double mean() const;
  double total() const;

  friend bool operator==(const Histogram&, const Histogram&) = default;

 private:
  std::vector<Entry> entries_;
  Time resolution_ = 1;
};

// Per-entry comparison with absolute tolerance on probabilities; supports must match.
bool approx_equal(const Histogram& a, const Histogram& b, double tol = kMassTolerance);

Histogram convolve(const Histogram& a, const Histogram& b);

// Smallest time with positive mass.
Time min_cost(const Histogram& h);

// First-order stochastic dominance: CDF_a >= CDF_b everywhere on the merged
// support, strictly somewhere. Comparisons use `tol` slack.
bool dominates(const Histogram& a, const Histogram& b, double tol = 1e-12);

// `time:prob` per line, ascending time, probabilities to 12 significant digits.
std::string format_histogram(const Histogram& h);

// Joint distribution over an ordered edge sequence. Each row key holds one
// time per edge, in edge order.
class JointDist {
 public:
  using Rows = std::map<std::vector<Time>, double>;

  JointDist() = default;
  JointDist(std::vector<EdgeId> edges, Rows rows, Time resolution = 1);
  static JointDist from_weights(std::vector<EdgeId> edges, Rows weights, Time resolution = 1);
  // Single-edge joint with the histogram's rows.
  static JointDist from_histogram(EdgeId edge, const Histogram& h);

  const std::vector<EdgeId>& edges() const { return edges_; }
  const Rows& rows() const { return rows_; }
  Time resolution() const { return resolution_; }
  double total() const;

  friend bool operator==(const JointDist&, const JointDist&) = default;

 private:
  std::vector<EdgeId> edges_;
  Rows rows_;
  Time resolution_ = 1;
};

bool approx_equal(const JointDist& a, const JointDist& b, double tol = kMassTolerance);

// Independent product; edge sets must be disjoint.
JointDist joint_product(const JointDist& a, const JointDist& b);

// Marginal on a contiguous run of the joint's edges.
JointDist marginal(const JointDist& j, std::span<const EdgeId> sub);

// Distribution of the row sums.
Histogram to_cost(const JointDist& j);

}  // namespace spotar
