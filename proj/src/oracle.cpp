#include "spotar/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace spotar {

std::vector<std::vector<EdgeId>> enumerate_simple_paths(const Network& net, const Query& q,
                                                        std::size_t max_edges, std::size_t limit) {
  std::vector<std::vector<EdgeId>> out;
  if (q.source == q.destination || max_edges == 0) return out;
  std::vector<bool> on_path(net.node_count(), false);
  std::vector<EdgeId> path;

  auto dfs = [&](auto&& self, NodeId v) -> void {
    if (v == q.destination) {
      if (out.size() >= limit)
        throw EnumerationLimitError("more than " + std::to_string(limit) + " simple paths");
      out.push_back(path);
      return;
    }
    if (path.size() >= max_edges) return;
    on_path[index_of(v)] = true;
    for (EdgeId e : net.out_edges(v)) {
      const NodeId w = net.edge(e).to;
      if (on_path[index_of(w)]) continue;
      path.push_back(e);
      self(self, w);
      path.pop_back();
    }
    on_path[index_of(v)] = false;
  };
  dfs(dfs, q.source);
  return out;
}

std::vector<UnitSpan> brute_force_units(const CostModel& model, std::span<const EdgeId> path) {
  const std::size_t n = path.size();
  std::vector<UnitSpan> stored;
  if (model.mode() == CostMode::Pace)
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t e = b + 2; e <= n; ++e)
        if (model.store().find_path_weight(path.subspan(b, e - b))) stored.push_back({b, e});

  std::vector<UnitSpan> units;
  std::vector<bool> covered(n, false);
  for (const UnitSpan& u : stored) {
    const bool inside_other = std::any_of(stored.begin(), stored.end(), [&](const UnitSpan& o) {
      return !(o == u) && o.begin <= u.begin && u.end <= o.end;
    });
    if (inside_other) continue;
    units.push_back(u);
    for (std::size_t i = u.begin; i < u.end; ++i) covered[i] = true;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!covered[i]) units.push_back({i, i + 1});
  std::sort(units.begin(), units.end(),
            [](const UnitSpan& a, const UnitSpan& b) { return a.begin < b.begin; });
  return units;
}

namespace {

JointDist::Rows unit_rows(const WeightStore& store, std::span<const EdgeId> edges) {
  if (edges.size() == 1) {
    JointDist::Rows rows;
    for (const auto& [t, p] : store.edge_weight(edges[0]).entries()) rows.emplace(std::vector<Time>{t}, p);
    return rows;
  }
  return store.find_path_weight(edges)->joint.rows();
}

}  // namespace

Histogram direct_path_cost(const CostModel& model, std::span<const EdgeId> path) {
  if (path.empty()) throw ValidationError("empty path");
  const WeightStore& store = model.store();
  // Full joint over path[0, covered).
  JointDist::Rows acc{{std::vector<Time>{}, 1.0}};
  std::size_t covered = 0;
  for (const UnitSpan& u : brute_force_units(model, path)) {
    const JointDist::Rows rows = unit_rows(store, path.subspan(u.begin, u.end - u.begin));
    const std::size_t o = covered - u.begin;
    std::map<std::vector<Time>, double> denom;
    for (const auto& [key, p] : rows) denom[std::vector<Time>(key.begin(), key.begin() + o)] += p;

    JointDist::Rows next;
    double mass = 0.0;
    for (const auto& [a, pa] : acc) {
      for (const auto& [b, pb] : rows) {
        if (!std::equal(a.end() - o, a.end(), b.begin())) continue;
        std::vector<Time> key = a;
        key.insert(key.end(), b.begin() + o, b.end());
        const double p = pa * pb / denom.at(std::vector<Time>(b.begin(), b.begin() + o));
        next[std::move(key)] += p;
        mass += p;
      }
    }
    if (!(mass > 0.0)) throw InconsistentWeightsError("overlapping units share no times");
    for (auto& kv : next) kv.second /= mass;
    acc = std::move(next);
    covered = u.end;
  }
  std::map<Time, double> cost;
  for (const auto& [key, p] : acc) {
    Time s = 0;
    for (Time t : key) s += t;
    cost[s] += p;
  }
  return Histogram::from_weights({cost.begin(), cost.end()}, store.resolution());
}

OracleResult exact_spotar(const Network& net, const CostModel& model, const Query& q,
                          std::size_t limit) {
  validate_query(net, q);
  OracleResult res;
  const auto paths = enumerate_simple_paths(net, q, SIZE_MAX, limit);
  res.paths_considered = paths.size();
  constexpr double kTie = 1e-12;
  for (const auto& p : paths) {
    const double prob = direct_path_cost(model, p).cdf(q.budget);
    if (!(prob > 0.0)) continue;
    bool take = !res.path || prob > res.probability + kTie;
    if (!take && std::abs(prob - res.probability) <= kTie)
      take = p.size() < res.path->size() || (p.size() == res.path->size() && p < *res.path);
    if (take) {
      res.path = p;
      res.probability = prob;
    }
  }
  return res;
}

MonteCarloEstimate monte_carlo_cdf(const CostModel& model, std::span<const EdgeId> path,
                                   Time budget, std::size_t samples, std::uint64_t seed) {
  struct Choice {
    std::vector<std::vector<Time>> rests;
    std::discrete_distribution<std::size_t> pick;
  };
  struct Stage {
    std::size_t overlap = 0;
    std::map<std::vector<Time>, Choice> by_overlap;
  };
  std::vector<Stage> stages;
  std::size_t covered = 0;
  for (const UnitSpan& u : brute_force_units(model, path)) {
    Stage st;
    st.overlap = covered - u.begin;
    std::map<std::vector<Time>, std::pair<std::vector<std::vector<Time>>, std::vector<double>>> groups;
    for (const auto& [key, p] : unit_rows(model.store(), path.subspan(u.begin, u.end - u.begin))) {
      auto& g = groups[std::vector<Time>(key.begin(), key.begin() + st.overlap)];
      g.first.emplace_back(key.begin() + st.overlap, key.end());
      g.second.push_back(p);
    }
    for (auto& [ov, g] : groups)
      st.by_overlap.emplace(ov, Choice{std::move(g.first), {g.second.begin(), g.second.end()}});
    stages.push_back(std::move(st));
    covered = u.end;
  }

  std::mt19937_64 rng(seed);
  MonteCarloEstimate est;
  std::size_t hits = 0;
  std::vector<Time> times;
  std::vector<Time> ov;
  while (est.accepted < samples) {
    times.clear();
    bool ok = true;
    for (Stage& st : stages) {
      ov.assign(times.end() - static_cast<std::ptrdiff_t>(st.overlap), times.end());
      auto it = st.by_overlap.find(ov);
      if (it == st.by_overlap.end()) {
        ok = false;
        break;
      }
      const auto& rest = it->second.rests[it->second.pick(rng)];
      times.insert(times.end(), rest.begin(), rest.end());
    }
    if (!ok) {
      ++est.rejected;
      if (est.rejected > 100 * samples + 1000) throw InconsistentWeightsError("sampler rejects everything");
      continue;
    }
    ++est.accepted;
    Time total = 0;
    for (Time t : times) total += t;
    if (total <= budget) ++hits;
  }
  est.p = samples ? static_cast<double>(hits) / static_cast<double>(samples) : 0.0;
  est.std_error = samples ? std::sqrt(est.p * (1.0 - est.p) / static_cast<double>(samples)) : 0.0;
  return est;
}

namespace {

constexpr double kBaseLat = 57.0;
constexpr double kBaseLon = 9.9;
constexpr double kEarthRadius = 6371008.8;

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

}  // namespace

Instance gen_instance(std::uint64_t seed, std::size_t nodes, double density, double joint_fraction) {
  if (nodes < 2) throw ValidationError("gen_instance: need at least 2 nodes");
  if (!(density > 0.0 && density <= 1.0)) throw ValidationError("gen_instance: density must be in (0,1]");
  if (!(joint_fraction >= 0.0 && joint_fraction <= 1.0))
    throw ValidationError("gen_instance: joint_fraction must be in [0,1]");
  std::mt19937_64 rng(seed);

  std::vector<Node> ns;
  for (std::size_t i = 0; i < nodes; ++i) {
    const double x = uniform(rng, 0.0, 3000.0), y = uniform(rng, 0.0, 3000.0);
    const double lat = kBaseLat + y / kEarthRadius * 180.0 / std::numbers::pi;
    const double lon =
        kBaseLon + x / (kEarthRadius * std::cos(kBaseLat * std::numbers::pi / 180.0)) * 180.0 / std::numbers::pi;
    ns.push_back({"n" + std::to_string(i), lat, lon});
  }

  const std::size_t pairs = nodes * (nodes - 1);
  const std::size_t target = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(density * static_cast<double>(pairs))), nodes - 1,
      std::min(2 * nodes, pairs));
  std::vector<std::size_t> perm(nodes);
  for (std::size_t i = 0; i < nodes; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::set<std::pair<std::size_t, std::size_t>> arcs;
  std::vector<std::pair<std::size_t, std::size_t>> order;
  auto add = [&](std::size_t u, std::size_t v) {
    if (u != v && arcs.emplace(u, v).second) order.emplace_back(u, v);
  };
  for (std::size_t i = 0; i + 1 < nodes; ++i) add(perm[i], perm[i + 1]);
  if (target >= nodes && nodes > 2) add(perm[nodes - 1], perm[0]);
  while (order.size() < target)
    add(static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(nodes) - 1)),
        static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(nodes) - 1)));

  std::vector<Edge> es;
  std::vector<Time> base, step;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const auto [u, v] = order[i];
    const double straight = equirectangular_m(ns[u].lat, ns[u].lon, ns[v].lat, ns[v].lon);
    const double length = std::max(100.0, std::round(straight * uniform(rng, 1.0, 1.4)));
    const double speed = uniform_int(rng, 0, 1) ? 15.0 : 10.0;
    es.push_back({"a" + std::to_string(i), NodeId(u), NodeId(v), length, speed});
    const Time t0 = static_cast<Time>(std::ceil(length / speed));
    base.push_back(t0);
    step.push_back(std::max<Time>(1, std::llround(static_cast<double>(t0) * uniform(rng, 0.15, 0.4))));
  }
  Instance inst{Network(std::move(ns), std::move(es)), {}};
  const Network& net = inst.net;

  // Congestion level 0..2 per edge; neighbouring edges drift by at most one.
  auto record = [&](const std::vector<EdgeId>& edges, int level, bool drift, std::int64_t count) {
    TrajectoryRecord rec;
    rec.edges = edges;
    rec.count = count;
    for (EdgeId e : edges) {
      if (drift) level = std::clamp(level + static_cast<int>(uniform_int(rng, -1, 1)), 0, 2);
      rec.times.push_back(base[index_of(e)] + level * step[index_of(e)]);
    }
    inst.trajectories.push_back(std::move(rec));
  };

  std::vector<std::vector<EdgeId>> subpaths;
  for (std::size_t i = 0; i < net.edge_count(); ++i) {
    const EdgeId a = EdgeId(i);
    for (EdgeId b : net.out_edges(net.edge(a).to)) {
      if (net.edge(b).to == net.edge(a).from) continue;
      subpaths.push_back({a, b});
      for (EdgeId c : net.out_edges(net.edge(b).to)) {
        const NodeId w = net.edge(c).to;
        if (w == net.edge(a).from || w == net.edge(b).from) continue;
        subpaths.push_back({a, b, c});
      }
    }
  }
  std::shuffle(subpaths.begin(), subpaths.end(), rng);
  const auto supported =
      static_cast<std::size_t>(std::llround(joint_fraction * static_cast<double>(subpaths.size())));
  for (std::size_t i = 0; i < subpaths.size(); ++i) {
    if (i < supported) {
      // Every level appears on every edge, so overlapping units always agree somewhere.
      for (int level = 0; level < 3; ++level) record(subpaths[i], level, false, uniform_int(rng, 2, 4));
      for (int k = 0; k < 2; ++k) record(subpaths[i], static_cast<int>(uniform_int(rng, 0, 2)), true, uniform_int(rng, 2, 3));
    } else if (uniform(rng, 0.0, 1.0) < 0.3) {
      record(subpaths[i], static_cast<int>(uniform_int(rng, 0, 2)), true, 1);
    }
  }
  for (std::size_t i = 0; i < net.edge_count(); ++i)
    if (uniform(rng, 0.0, 1.0) < 0.8)
      record({EdgeId(i)}, static_cast<int>(uniform_int(rng, 0, 2)), false, uniform_int(rng, 3, 8));
  return inst;
}

Query random_query(const Network& net, const WeightStore& store, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto n = static_cast<std::int64_t>(net.node_count());
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const auto s = NodeId(static_cast<std::uint32_t>(uniform_int(rng, 0, n - 1)));
    const auto d = NodeId(static_cast<std::uint32_t>(uniform_int(rng, 0, n - 1)));
    if (s == d) continue;
    const MinTree tree = build_min_tree(net, store, d, kInfiniteTime / 2);
    const auto least = tree.get(s);
    if (!least) continue;
    const double factor = uniform(rng, 0.9, 1.6);
    const Time res = net.resolution();
    Time budget = static_cast<Time>(std::llround(static_cast<double>(*least) * factor / static_cast<double>(res))) * res;
    return Query{s, d, std::max(budget, res)};
  }
  throw ValidationError("random_query: no connected node pair");
}

std::vector<VerifyRow> verify_instances(const VerifyOptions& opts) {
  std::vector<VerifyRow> rows;
  for (std::size_t i = 0; i < opts.instances; ++i) {
    const std::uint64_t seed = opts.seed + i;
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    const auto nodes = static_cast<std::size_t>(uniform_int(rng, 4, static_cast<std::int64_t>(std::max<std::size_t>(opts.max_nodes, 4))));
    const double density = uniform(rng, 0.2, 0.5);
    const double joint_fraction = uniform(rng, 0.2, 0.9);
    const Instance inst = gen_instance(seed, nodes, density, joint_fraction);
    const WeightStore store = build_store(inst.net, inst.trajectories);
    const Query q = random_query(inst.net, store, seed);
    for (CostMode mode : {CostMode::Pace, CostMode::Edge}) {
      const CostModel model(store, mode);
      std::optional<OracleResult> truth;
      std::string oracle_error;
      try {
        truth = exact_spotar(inst.net, model, q);
      } catch (const Error& e) {
        oracle_error = e.what();
      }
      for (HeuristicKind h : {HeuristicKind::ShortestPathTree, HeuristicKind::Euclidean}) {
        VerifyRow row;
        row.seed = seed;
        row.mode = mode;
        row.heuristic = h;
        row.query = q;
        try {
          const SolveResult r = solve(inst.net, model, h, q);
          row.solver_p = r.probability;
          row.explored_edges = r.explored_edges;
          if (r.found()) row.path_p = direct_path_cost(model, r.best_path).cdf(q.budget);
          if (!truth) {
            row.error = "oracle: " + oracle_error;
          } else {
            row.oracle_p = truth->probability;
            row.ok = std::abs(row.solver_p - row.oracle_p) <= opts.tolerance &&
                     std::abs(row.path_p - row.solver_p) <= opts.tolerance;
          }
        } catch (const Error& e) {
          row.error = std::string("solver: ") + e.what();
        }
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

}  // namespace spotar
