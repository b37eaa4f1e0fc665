#include "spotar/dist.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <unordered_set>

namespace spotar {

namespace {

void check_resolution(Time resolution) {
  if (resolution <= 0) throw ValidationError("time resolution must be positive");
}

void check_same_resolution(Time a, Time b) {
  if (a != b)
    throw ValidationError("mismatched time resolution (" + std::to_string(a) + " vs " +
                          std::to_string(b) + ")");
}

std::vector<Histogram::Entry> canonical(std::vector<Histogram::Entry> entries, Time resolution) {
  for (const auto& [t, p] : entries) {
    if (t < 0 || t % resolution != 0)
      throw ValidationError("histogram time " + std::to_string(t) + " is not on the grid");
    if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("histogram probability must be >= 0");
  }
  std::sort(entries.begin(), entries.end());
  std::vector<Histogram::Entry> out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    if (!out.empty() && out.back().first == e.first)
      out.back().second += e.second;
    else
      out.push_back(e);
  }
  std::erase_if(out, [](const Histogram::Entry& e) { return e.second <= 0.0; });
  return out;
}

void check_mass(double total, const char* what) {
  if (std::abs(total - 1.0) > kMassTolerance)
    throw ValidationError(std::string(what) + " mass " + std::to_string(total) + " is not 1");
}

}  // namespace

Histogram::Histogram(std::vector<Entry> entries, Time resolution) : resolution_(resolution) {
  check_resolution(resolution);
  entries_ = canonical(std::move(entries), resolution);
  check_mass(total(), "histogram");
}

Histogram Histogram::from_weights(std::vector<Entry> weights, Time resolution) {
  check_resolution(resolution);
  auto entries = canonical(std::move(weights), resolution);
  double sum = 0.0;
  for (const auto& e : entries) sum += e.second;
  if (!(sum > 0.0)) throw ValidationError("histogram has no mass");
  for (auto& e : entries) e.second /= sum;
  Histogram h;
  h.entries_ = std::move(entries);
  h.resolution_ = resolution;
  return h;
}

Histogram Histogram::point_mass(Time t, Time resolution) {
  return Histogram({{t, 1.0}}, resolution);
}

double Histogram::prob_at(Time t) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), Entry{t, -1.0});
  return it != entries_.end() && it->first == t ? it->second : 0.0;
}

double Histogram::cdf(Time t) const {
  double acc = 0.0;
  for (const auto& [time, p] : entries_) {
    if (time > t) break;
    acc += p;
  }
  return acc;
}

double Histogram::mean() const {
  double m = 0.0;
  for (const auto& [t, p] : entries_) m += static_cast<double>(t) * p;
  return m;
}

double Histogram::total() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.second;
  return s;
}

bool approx_equal(const Histogram& a, const Histogram& b, double tol) {
  if (a.resolution() != b.resolution() || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.entries()[i].first != b.entries()[i].first) return false;
    if (std::abs(a.entries()[i].second - b.entries()[i].second) > tol) return false;
  }
  return true;
}

Histogram convolve(const Histogram& a, const Histogram& b) {
  check_same_resolution(a.resolution(), b.resolution());
  if (a.empty() || b.empty()) throw ValidationError("cannot convolve an empty histogram");
  const Time res = a.resolution();
  const Time lo = a.min_time() + b.min_time();
  const std::size_t span =
      static_cast<std::size_t>((a.max_time() + b.max_time() - lo) / res) + 1;
  std::vector<double> acc(span, 0.0);
  for (const auto& [ta, pa] : a.entries())
    for (const auto& [tb, pb] : b.entries())
      acc[static_cast<std::size_t>((ta + tb - lo) / res)] += pa * pb;
  std::vector<Histogram::Entry> out;
  for (std::size_t i = 0; i < span; ++i)
    if (acc[i] > 0.0) out.emplace_back(lo + static_cast<Time>(i) * res, acc[i]);
  return Histogram::from_weights(std::move(out), res);
}

Time min_cost(const Histogram& h) {
  if (h.empty()) throw ValidationError("min_cost of an empty histogram");
  return h.min_time();
}

bool dominates(const Histogram& a, const Histogram& b, double tol) {
  check_same_resolution(a.resolution(), b.resolution());
  const auto& ea = a.entries();
  const auto& eb = b.entries();
  std::size_t i = 0, j = 0;
  double ca = 0.0, cb = 0.0;
  bool strict = false;
  while (i < ea.size() || j < eb.size()) {
    Time t = kInfiniteTime;
    if (i < ea.size()) t = ea[i].first;
    if (j < eb.size()) t = std::min(t, eb[j].first);
    while (i < ea.size() && ea[i].first == t) ca += ea[i++].second;
    while (j < eb.size() && eb[j].first == t) cb += eb[j++].second;
    if (ca < cb - tol) return false;
    if (ca > cb + tol) strict = true;
  }
  return strict;
}

std::string format_histogram(const Histogram& h) {
  std::string out;
  char buf[64];
  for (const auto& [t, p] : h.entries()) {
    out += std::to_string(t);
    out += ':';
    auto res = std::to_chars(buf, buf + sizeof buf, p, std::chars_format::general, 12);
    out.append(buf, res.ptr);
    out += '\n';
  }
  return out;
}

namespace {

JointDist::Rows canonical_rows(JointDist::Rows rows, std::size_t width, Time resolution) {
  std::erase_if(rows, [](const auto& kv) { return kv.second == 0.0; });
  for (const auto& [key, p] : rows) {
    if (key.size() != width) throw ValidationError("joint row width does not match its edge count");
    if (!(p > 0.0) || !std::isfinite(p)) throw ValidationError("joint probability must be >= 0");
    for (Time t : key)
      if (t < 0 || t % resolution != 0)
        throw ValidationError("joint time " + std::to_string(t) + " is not on the grid");
  }
  return rows;
}

void check_unique_edges(const std::vector<EdgeId>& edges) {
  if (edges.empty()) throw ValidationError("joint distribution needs at least one edge");
  std::unordered_set<std::uint32_t> seen;
  for (EdgeId e : edges)
    if (!seen.insert(index_of(e)).second) throw ValidationError("joint repeats an edge");
}

}  // namespace

JointDist::JointDist(std::vector<EdgeId> edges, Rows rows, Time resolution)
    : edges_(std::move(edges)), resolution_(resolution) {
  check_resolution(resolution);
  check_unique_edges(edges_);
  rows_ = canonical_rows(std::move(rows), edges_.size(), resolution);
  check_mass(total(), "joint");
}

JointDist JointDist::from_weights(std::vector<EdgeId> edges, Rows weights, Time resolution) {
  double sum = 0.0;
  for (const auto& kv : weights) sum += kv.second;
  if (!(sum > 0.0)) throw ValidationError("joint distribution has no mass");
  for (auto& kv : weights) kv.second /= sum;
  return JointDist(std::move(edges), std::move(weights), resolution);
}

JointDist JointDist::from_histogram(EdgeId edge, const Histogram& h) {
  Rows rows;
  for (const auto& [t, p] : h.entries()) rows.emplace(std::vector<Time>{t}, p);
  return JointDist({edge}, std::move(rows), h.resolution());
}

double JointDist::total() const {
  double s = 0.0;
  for (const auto& kv : rows_) s += kv.second;
  return s;
}

bool approx_equal(const JointDist& a, const JointDist& b, double tol) {
  if (a.edges() != b.edges() || a.resolution() != b.resolution()) return false;
  // Rows below `tol` on one side may be absent on the other.
  auto covered = [tol](const JointDist& x, const JointDist& y) {
    for (const auto& [key, p] : x.rows()) {
      auto it = y.rows().find(key);
      const double q = it == y.rows().end() ? 0.0 : it->second;
      if (std::abs(p - q) > tol) return false;
    }
    return true;
  };
  return covered(a, b) && covered(b, a);
}

JointDist joint_product(const JointDist& a, const JointDist& b) {
  check_same_resolution(a.resolution(), b.resolution());
  std::unordered_set<std::uint32_t> left;
  for (EdgeId e : a.edges()) left.insert(index_of(e));
  for (EdgeId e : b.edges())
    if (left.contains(index_of(e))) throw ValidationError("joint_product: overlapping edge sets");
  std::vector<EdgeId> edges = a.edges();
  edges.insert(edges.end(), b.edges().begin(), b.edges().end());
  JointDist::Rows rows;
  for (const auto& [ka, pa] : a.rows()) {
    for (const auto& [kb, pb] : b.rows()) {
      std::vector<Time> key = ka;
      key.insert(key.end(), kb.begin(), kb.end());
      rows.emplace(std::move(key), pa * pb);
    }
  }
  return JointDist::from_weights(std::move(edges), std::move(rows), a.resolution());
}

JointDist marginal(const JointDist& j, std::span<const EdgeId> sub) {
  const auto& edges = j.edges();
  auto it = std::search(edges.begin(), edges.end(), sub.begin(), sub.end());
  if (sub.empty() || it == edges.end())
    throw ValidationError("marginal: requested edges are not a contiguous sub-path of the joint");
  const auto offset = static_cast<std::size_t>(it - edges.begin());
  JointDist::Rows rows;
  for (const auto& [key, p] : j.rows()) {
    std::vector<Time> sub_key(key.begin() + static_cast<std::ptrdiff_t>(offset),
                              key.begin() + static_cast<std::ptrdiff_t>(offset + sub.size()));
    rows[std::move(sub_key)] += p;
  }
  return JointDist::from_weights(std::vector<EdgeId>(sub.begin(), sub.end()), std::move(rows),
                                 j.resolution());
}

Histogram to_cost(const JointDist& j) {
  std::map<Time, double> acc;
  for (const auto& [key, p] : j.rows())
    acc[std::accumulate(key.begin(), key.end(), Time{0})] += p;
  return Histogram::from_weights({acc.begin(), acc.end()}, j.resolution());
}

}  // namespace spotar
