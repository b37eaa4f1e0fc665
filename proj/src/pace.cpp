// Path-distribution composition: coarsest combinations and overlap fusion.

#include <algorithm>
#include <numeric>

#include "spotar/weights.hpp"

namespace spotar {

std::vector<UnitSpan> coarsest_combination(const WeightStore& store, std::span<const EdgeId> path,
                                           std::size_t unit_cap) {
  const std::size_t n = path.size();
  const std::size_t cap = std::min(unit_cap, store.longest_unit());
  // earliest[j]: start of the longest stored unit ending at position j + 1.
  std::vector<std::size_t> earliest(n);
  for (std::size_t j = 0; j < n; ++j) {
    earliest[j] = j;
    for (std::size_t len = std::min(cap, j + 1); len >= 2; --len) {
      if (store.path_unit(path.subspan(j + 1 - len, len))) {
        earliest[j] = j + 1 - len;
        break;
      }
    }
  }
  // A unit is maximal iff every unit ending later starts strictly later.
  std::vector<UnitSpan> units;
  std::size_t min_later_start = n;
  for (std::size_t j = n; j-- > 0;) {
    if (earliest[j] < min_later_start) {
      units.push_back({earliest[j], j + 1});
      min_later_start = earliest[j];
    }
  }
  std::reverse(units.begin(), units.end());
  return units;
}

WindowJoint WindowJoint::empty(Time resolution) {
  WindowJoint w;
  w.resolution_ = resolution;
  w.keys_ = {0};
  w.probs_ = {1.0};
  return w;
}

Histogram WindowJoint::cost() const {
  std::map<Time, double> acc;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto k = key(i);
    acc[std::accumulate(k.begin(), k.end(), Time{0})] += probs_[i];
  }
  return Histogram::from_weights({acc.begin(), acc.end()}, resolution_);
}

Time WindowJoint::min_total() const {
  Time best = kInfiniteTime;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto k = key(i);
    best = std::min(best, std::accumulate(k.begin(), k.end(), Time{0}));
  }
  return best;
}

WindowJoint WindowJoint::fuse(const FusionUnit& unit, std::size_t overlap,
                              std::size_t keep_window) const {
  if (overlap > window_ || overlap >= unit.edges.size())
    throw Error("fuse: overlap exceeds the explicit window");
  const std::size_t fresh = unit.edges.size() - overlap;
  WindowJoint out;
  out.resolution_ = resolution_;
  out.covered_ = covered_ + fresh;
  out.window_ = std::min(keep_window, std::min(window_ + fresh, out.covered_));
  const std::size_t lump = window_ + fresh - out.window_;
  const std::size_t w_in = width(), w_out = out.width();

  // Columns: prefix, window_ old times, fresh new times; the oldest `lump`
  // explicit times fold into the prefix.
  const auto& table = unit.conditional[overlap];
  std::vector<Time> keys;
  std::vector<double> probs;
  double mass = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const auto k = key(i);
    auto it = table.find(k.last(overlap));
    if (it == table.end()) continue;
    Time prefix = k[0];
    for (std::size_t c = 1; c <= std::min(lump, w_in - 1); ++c) prefix += k[c];
    for (const auto& [rest, cond] : it->second) {
      const std::size_t base = keys.size();
      keys.resize(base + w_out);
      Time* row = keys.data() + base;
      Time sum = prefix;
      std::size_t col = 0, pos = 1;
      for (std::size_t c = 1; c < w_in; ++c, ++col)
        if (col >= lump) row[pos++] = k[c];
      for (Time t : rest) {
        if (col++ < lump)
          sum += t;
        else
          row[pos++] = t;
      }
      row[0] = sum;
      const double q = probs_[i] * cond;
      probs.push_back(q);
      mass += q;
    }
  }
  if (!(mass > 0.0))
    throw InconsistentWeightsError("stored joints share no overlap values; composed mass is 0");

  // Sort rows by key and merge duplicates.
  std::vector<std::size_t> order(probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto row_at = [&](std::size_t r) { return std::span<const Time>(keys.data() + r * w_out, w_out); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto x = row_at(a), y = row_at(b);
    return std::lexicographical_compare(x.begin(), x.end(), y.begin(), y.end());
  });
  out.keys_.reserve(keys.size());
  out.probs_.reserve(probs.size());
  for (std::size_t r : order) {
    const auto k = row_at(r);
    if (!out.probs_.empty() && std::equal(k.begin(), k.end(), out.keys_.end() - static_cast<std::ptrdiff_t>(w_out))) {
      out.probs_.back() += probs[r];
    } else {
      out.keys_.insert(out.keys_.end(), k.begin(), k.end());
      out.probs_.push_back(probs[r]);
    }
  }
  for (double& p : out.probs_) p /= mass;
  return out;
}

namespace {

const FusionUnit& unit_at(const WeightStore& store, std::span<const EdgeId> path, UnitSpan s) {
  const FusionUnit* u = store.path_unit(path.subspan(s.begin, s.end - s.begin));
  if (!u) throw Error("internal: combination references a missing unit");
  return *u;
}

std::vector<UnitSpan> units_for(const CostModel& model, std::span<const EdgeId> path) {
  if (model.mode() == CostMode::Edge) {
    std::vector<UnitSpan> singles;
    for (std::size_t i = 0; i < path.size(); ++i) singles.push_back({i, i + 1});
    return singles;
  }
  return coarsest_combination(model.store(), path, model.unit_cap());
}

WindowJoint fold_units(const WeightStore& store, std::span<const EdgeId> path,
                       std::span<const UnitSpan> units, WindowJoint acc) {
  for (const UnitSpan& u : units) {
    const std::size_t overlap = acc.covered() > u.begin ? acc.covered() - u.begin : 0;
    acc = acc.fuse(unit_at(store, path, u), overlap, SIZE_MAX);
  }
  return acc;
}

JointDist to_joint(const WindowJoint& w, std::span<const EdgeId> path) {
  JointDist::Rows rows;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto k = w.key(i);
    rows.emplace(std::vector<Time>(k.begin() + 1, k.end()), w.prob(i));
  }
  return JointDist::from_weights({path.begin(), path.end()}, std::move(rows), w.resolution());
}

WindowJoint from_joint(const JointDist& j) {
  // A full joint is the fusion of the empty joint with one unit spanning it.
  FusionUnit whole;
  whole.edges = j.edges();
  whole.conditional.resize(1);
  for (const auto& [key, p] : j.rows()) whole.conditional[0][{}].emplace_back(key, p);
  return WindowJoint::empty(j.resolution()).fuse(whole, 0, SIZE_MAX);
}

}  // namespace

JointDist path_joint(const CostModel& model, std::span<const EdgeId> path) {
  if (path.empty()) throw ValidationError("path_joint: empty path");
  const auto units = units_for(model, path);
  return to_joint(fold_units(model.store(), path, units, WindowJoint::empty(model.store().resolution())),
                  path);
}

JointDist extend_joint(const CostModel& model, const JointDist& base, EdgeId next) {
  std::vector<EdgeId> path = base.edges();
  const auto old_units = units_for(model, path);
  path.push_back(next);
  const auto new_units = units_for(model, path);
  const UnitSpan last = new_units.back();
  std::span<const UnitSpan> kept(new_units.data(), new_units.size() - 1);
  WindowJoint acc = WindowJoint::empty(base.resolution());
  if (std::equal(kept.begin(), kept.end(), old_units.begin(), old_units.end())) {
    acc = from_joint(base);
  } else {
    acc = fold_units(model.store(), path, kept, acc);
  }
  const std::size_t overlap = acc.covered() > last.begin ? acc.covered() - last.begin : 0;
  acc = acc.fuse(unit_at(model.store(), path, last), overlap, SIZE_MAX);
  return to_joint(acc, path);
}

PathState PathState::start(const CostModel& model, EdgeId first) {
  const std::size_t window = model.unit_cap() - 1;
  PathState s;
  s.entries_.push_back({{0, 1},
                        WindowJoint::empty(model.store().resolution())
                            .fuse(model.store().edge_unit(first), 0, window)});
  return s;
}

PathState PathState::extended(const CostModel& model, std::span<const EdgeId> path,
                              EdgeId next) const {
  const WeightStore& store = model.store();
  const std::size_t cap = model.unit_cap();
  const std::size_t n = path.size();

  std::vector<EdgeId> ext(path.begin(), path.end());
  ext.push_back(next);
  const std::span<const EdgeId> full(ext);

  // Longest stored unit ending with `next`.
  std::size_t begin = n;
  for (std::size_t len = std::min(cap, n + 1); len >= 2; --len) {
    if (store.path_unit(full.subspan(n + 1 - len, len))) {
      begin = n + 1 - len;
      break;
    }
  }

  PathState out;
  for (const Entry& e : entries_)
    if (e.span.begin < begin) out.entries_.push_back(e);
  const WindowJoint left =
      out.entries_.empty() ? WindowJoint::empty(store.resolution()) : out.entries_.back().fold;
  const std::size_t overlap = left.covered() > begin ? left.covered() - begin : 0;
  out.entries_.push_back(
      {{begin, n + 1}, left.fuse(unit_at(store, full, {begin, n + 1}), overlap, cap - 1)});

  // Later units start at or after n + 2 - cap; keep those entries plus the
  // last one before that threshold.
  const std::size_t threshold = n + 2 > cap ? n + 2 - cap : 0;
  std::size_t first_kept = 0;
  for (std::size_t i = 0; i < out.entries_.size(); ++i)
    if (out.entries_[i].span.begin < threshold) first_kept = i;
  out.entries_.erase(out.entries_.begin(), out.entries_.begin() + static_cast<std::ptrdiff_t>(first_kept));
  return out;
}

}  // namespace spotar
