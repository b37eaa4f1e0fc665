#include "spotar/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "text_util.hpp"

namespace spotar {

std::string Method::name() const {
  return std::string(to_string(heuristic)) + "+" + (mode == CostMode::Pace ? "PACE" : "EDGE");
}

Method parse_method(std::string_view s) {
  s = detail::trim(s);
  const auto plus = s.find('+');
  if (plus == std::string_view::npos)
    throw ConfigError("method '" + std::string(s) + "' is not of the form SP|BA+PACE|EDGE");
  Method m;
  m.heuristic = parse_heuristic(detail::trim(s.substr(0, plus)));
  const std::string_view mode = detail::trim(s.substr(plus + 1));
  if (mode == "PACE" || mode == "pace")
    m.mode = CostMode::Pace;
  else if (mode == "EDGE" || mode == "edge")
    m.mode = CostMode::Edge;
  else
    throw ConfigError("unknown cost model '" + std::string(mode) + "' in method");
  return m;
}

std::vector<Method> all_methods() {
  return {{HeuristicKind::ShortestPathTree, CostMode::Pace},
          {HeuristicKind::ShortestPathTree, CostMode::Edge},
          {HeuristicKind::Euclidean, CostMode::Pace},
          {HeuristicKind::Euclidean, CostMode::Edge}};
}

void validate_config(const BenchConfig& cfg) {
  if (cfg.budgets.empty()) throw ConfigError("budgets: at least one budget required");
  for (Time b : cfg.budgets)
    if (b <= 0) throw ConfigError("budgets: budgets must be positive");
  if (cfg.buckets.empty()) throw ConfigError("buckets: at least one bucket required");
  for (std::size_t i = 0; i < cfg.buckets.size(); ++i) {
    const auto& b = cfg.buckets[i];
    if (!(b.lo_km >= 0.0 && b.hi_km > b.lo_km)) throw ConfigError("buckets: each bucket needs 0 <= lo < hi");
    if (i > 0 && b.lo_km < cfg.buckets[i - 1].hi_km)
      throw ConfigError("buckets: buckets must be sorted and non-overlapping");
  }
  if (cfg.queries_per_cell < 1) throw ConfigError("queries_per_cell: must be >= 1");
  if (cfg.methods.empty()) throw ConfigError("methods: at least one method required");
  if (cfg.threads < 1) throw ConfigError("threads: must be >= 1");
}

BenchConfig parse_config(std::string_view text, const std::string& source) {
  std::map<std::string, std::pair<std::string, std::size_t>> kv;
  std::size_t line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected key = value");
    std::string key(detail::trim(line.substr(0, eq)));
    if (kv.count(key)) throw ParseError(source, line_no, "duplicate key '" + key + "'");
    kv[key] = {std::string(detail::trim(line.substr(eq + 1))), line_no};
  }

  static const std::vector<std::string> known{"budgets", "budget_set", "buckets", "queries_per_cell",
                                              "methods", "seed", "threads"};
  for (const auto& [key, v] : kv)
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ParseError(source, v.second, "unknown key '" + key + "'");
  for (const char* key : {"buckets", "queries_per_cell", "methods", "seed"})
    if (!kv.count(key)) throw ConfigError(source + ": missing required key '" + key + "'");

  BenchConfig cfg;
  auto field = [&](const std::string& key, auto&& parse) {
    const auto& [value, line] = kv.at(key);
    try {
      parse(value);
    } catch (const detail::FieldError& e) {
      throw ParseError(source, line, key + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ParseError(source, line, e.what());
    } catch (const ValidationError& e) {
      throw ParseError(source, line, key + ": " + e.what());
    }
  };
  auto non_negative = [](std::int64_t v, const char* key) {
    if (v < 0) throw ConfigError(std::string(key) + ": must be non-negative");
    return static_cast<std::size_t>(v);
  };

  if (kv.count("budget_set")) {
    field("budget_set", [&](const std::string& v) {
      if (v == "text")
        cfg.budgets = kTextBudgets;
      else if (v == "figure")
        cfg.budgets = kFigureBudgets;
      else
        throw ConfigError("budget_set: expected text|figure");
    });
    if (kv.count("budgets")) throw ConfigError(source + ": give either budgets or budget_set, not both");
  }
  if (kv.count("budgets"))
    field("budgets", [&](const std::string& v) {
      cfg.budgets.clear();
      for (auto f : detail::split(v, ',')) cfg.budgets.push_back(detail::parse_int(f));
    });
  field("buckets", [&](const std::string& v) {
    for (auto f : detail::split(v, ',')) {
      const auto parts = detail::split(detail::trim(f), '-');
      if (parts.size() != 2) throw ConfigError("buckets: expected lo-hi pairs such as 0-1,1-2");
      cfg.buckets.push_back({detail::parse_double(parts[0]), detail::parse_double(parts[1])});
    }
  });
  field("queries_per_cell", [&](const std::string& v) {
    cfg.queries_per_cell = non_negative(detail::parse_int(v), "queries_per_cell");
  });
  field("methods", [&](const std::string& v) {
    cfg.methods.clear();
    if (v == "all")
      cfg.methods = all_methods();
    else
      for (auto f : detail::split(v, ',')) cfg.methods.push_back(parse_method(f));
  });
  field("seed", [&](const std::string& v) {
    cfg.seed = static_cast<std::uint64_t>(non_negative(detail::parse_int(v), "seed"));
  });
  if (kv.count("threads"))
    field("threads", [&](const std::string& v) { cfg.threads = non_negative(detail::parse_int(v), "threads"); });
  validate_config(cfg);
  return cfg;
}

BenchConfig load_config(const std::filesystem::path& file) {
  return parse_config(detail::read_file(file), file.string());
}

std::vector<BenchQuery> gen_queries(const Network& net, const BenchConfig& cfg) {
  validate_config(cfg);
  if (net.node_count() < 2) throw ConfigError("network needs at least two nodes");
  const auto n = static_cast<std::uint32_t>(net.node_count());
  std::vector<BenchQuery> out;
  for (std::size_t bi = 0; bi < cfg.budgets.size(); ++bi) {
    for (std::size_t ki = 0; ki < cfg.buckets.size(); ++ki) {
      const DistanceBucket& bucket = cfg.buckets[ki];
      std::seed_seq seq{cfg.seed, static_cast<std::uint64_t>(bi), static_cast<std::uint64_t>(ki)};
      std::mt19937_64 rng(seq);
      std::uniform_int_distribution<std::uint32_t> pick(0, n - 1);
      const std::size_t max_attempts = 20000 * cfg.queries_per_cell;
      std::size_t found = 0;
      for (std::size_t attempt = 0; found < cfg.queries_per_cell; ++attempt) {
        if (attempt == max_attempts)
          throw ConfigError("bucket [" + detail::format_double(bucket.lo_km) + "," +
                            detail::format_double(bucket.hi_km) + ") km cannot be filled on this network");
        const NodeId s = NodeId(pick(rng)), d = NodeId(pick(rng));
        if (s == d) continue;
        const double km = net.distance_m(s, d) / 1000.0;
        if (km < bucket.lo_km || km >= bucket.hi_km) continue;
        out.push_back({cfg.budgets[bi], ki, found, Query{s, d, cfg.budgets[bi]}});
        ++found;
      }
    }
  }
  return out;
}

std::vector<BenchRow> run_bench(const Network& net, const WeightStore& store, const BenchConfig& cfg) {
  return run_bench(net, store, cfg, gen_queries(net, cfg));
}

std::vector<BenchRow> run_bench(const Network& net, const WeightStore& store, const BenchConfig& cfg,
                                const std::vector<BenchQuery>& queries) {
  validate_config(cfg);
  struct Job {
    std::size_t method;
    std::size_t query;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < cfg.methods.size(); ++m)
    for (std::size_t i = 0; i < queries.size(); ++i) jobs.push_back({m, i});
  std::vector<BenchRow> rows(jobs.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs.size();) {
      const Method& method = cfg.methods[jobs[j].method];
      const BenchQuery& bq = queries[jobs[j].query];
      const CostModel model(store, method.mode);
      const SolveResult r = solve(net, model, method.heuristic, bq.query);
      BenchRow& row = rows[j];
      row.method = method.name();
      row.budget = bq.budget;
      row.bucket_lo = cfg.buckets[bq.bucket].lo_km;
      row.bucket_hi = cfg.buckets[bq.bucket].hi_km;
      row.query_id = bq.query_id;
      row.probability = r.probability;
      row.wall_time_s = r.wall_time_s;
      row.explored_edges = r.explored_edges;
      row.expanded_labels = r.expanded_labels;
      row.path_edges = r.best_path.size();
    }
  };
  const std::size_t threads = std::min(cfg.threads, std::max<std::size_t>(jobs.size(), 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  std::vector<std::size_t> method_rank(jobs.size());
  for (std::size_t j = 0; j < jobs.size(); ++j) method_rank[j] = jobs[j].method;
  std::vector<std::size_t> order(jobs.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const BenchRow &x = rows[a], &y = rows[b];
    return std::tie(method_rank[a], x.budget, x.bucket_lo, x.query_id) <
           std::tie(method_rank[b], y.budget, y.bucket_lo, y.query_id);
  });
  std::vector<BenchRow> sorted;
  sorted.reserve(rows.size());
  for (std::size_t j : order) sorted.push_back(std::move(rows[j]));
  return sorted;
}

std::vector<CellAggregate> aggregate(const std::vector<BenchRow>& rows) {
  std::vector<CellAggregate> cells;
  std::vector<std::vector<const BenchRow*>> members;
  for (const BenchRow& r : rows) {
    auto it = std::find_if(cells.begin(), cells.end(), [&](const CellAggregate& c) {
      return c.method == r.method && c.budget == r.budget && c.bucket_lo == r.bucket_lo && c.bucket_hi == r.bucket_hi;
    });
    if (it == cells.end()) {
      cells.push_back({r.method, r.budget, r.bucket_lo, r.bucket_hi});
      members.emplace_back();
      it = cells.end() - 1;
    }
    members[static_cast<std::size_t>(it - cells.begin())].push_back(&r);
  }
  auto mean_sd = [](const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return std::pair{mean, sd};
  };
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::vector<double> wall, explored, prob;
    for (const BenchRow* r : members[i]) {
      wall.push_back(r->wall_time_s);
      explored.push_back(static_cast<double>(r->explored_edges));
      prob.push_back(r->probability);
    }
    cells[i].n = members[i].size();
    std::tie(cells[i].mean_wall_time_s, cells[i].sd_wall_time_s) = mean_sd(wall);
    std::tie(cells[i].mean_explored_edges, cells[i].sd_explored_edges) = mean_sd(explored);
    cells[i].mean_probability = mean_sd(prob).first;
  }
  return cells;
}

std::string format_rows(const std::vector<BenchRow>& rows) {
  using detail::format_double;
  std::ostringstream out;
  out << kBenchHeader << '\n';
  for (const BenchRow& r : rows)
    out << r.method << ',' << r.budget << ',' << format_double(r.bucket_lo) << ',' << format_double(r.bucket_hi)
        << ',' << r.query_id << ',' << format_double(r.probability) << ',' << format_double(r.wall_time_s) << ','
        << r.explored_edges << ',' << r.expanded_labels << ',' << r.path_edges << '\n';
  return out.str();
}

std::vector<BenchRow> parse_rows(std::string_view text, const std::string& source) {
  const auto lines = detail::split_lines(text);
  if (lines.empty() || detail::trim(lines[0]) != kBenchHeader)
    throw ParseError(source, 1, "missing or unexpected header");
  std::vector<BenchRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = detail::split(detail::trim(lines[i]), ',');
    if (f.size() != 10) throw ParseError(source, i + 1, "expected 10 fields");
    try {
      BenchRow r;
      r.method = std::string(f[0]);
      r.budget = detail::parse_int(f[1]);
      r.bucket_lo = detail::parse_double(f[2]);
      r.bucket_hi = detail::parse_double(f[3]);
      r.query_id = static_cast<std::size_t>(detail::parse_int(f[4]));
      r.probability = detail::parse_double(f[5]);
      r.wall_time_s = detail::parse_double(f[6]);
      r.explored_edges = static_cast<std::size_t>(detail::parse_int(f[7]));
      r.expanded_labels = static_cast<std::size_t>(detail::parse_int(f[8]));
      r.path_edges = static_cast<std::size_t>(detail::parse_int(f[9]));
      rows.push_back(std::move(r));
    } catch (const detail::FieldError& e) {
      throw ParseError(source, i + 1, e.what());
    }
  }
  return rows;
}

std::string format_aggregates(const std::vector<CellAggregate>& cells) {
  using detail::format_double;
  std::ostringstream out;
  out << "method,budget,bucket_lo,bucket_hi,n,mean_wall_time_s,sd_wall_time_s,mean_explored_edges,"
         "sd_explored_edges,mean_probability\n";
  for (const CellAggregate& c : cells)
    out << c.method << ',' << c.budget << ',' << format_double(c.bucket_lo) << ',' << format_double(c.bucket_hi)
        << ',' << c.n << ',' << format_double(c.mean_wall_time_s) << ',' << format_double(c.sd_wall_time_s) << ','
        << format_double(c.mean_explored_edges) << ',' << format_double(c.sd_explored_edges) << ','
        << format_double(c.mean_probability) << '\n';
  return out.str();
}

std::filesystem::path emit_csv(const std::vector<BenchRow>& rows, const std::filesystem::path& file) {
  if (rows.empty()) throw ValidationError("emit_csv: no rows");
  detail::write_file(file, format_rows(rows));
  std::filesystem::path agg = file;
  agg.replace_filename(file.stem().string() + ".agg.csv");
  detail::write_file(agg, format_aggregates(aggregate(rows)));
  return agg;
}

Instance gen_city_grid(std::uint64_t seed, const GridOptions& opts) {
  if (opts.cols < 2 || opts.rows < 2) throw ValidationError("grid needs at least 2x2 nodes");
  if (!(opts.spacing_m > 0.0)) throw ValidationError("grid spacing must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  constexpr double kLat = 57.0, kLon = 9.9, kR = 6371008.8;
  const double deg = 180.0 / std::numbers::pi;
  const double cos_lat = std::cos(kLat / deg);

  std::vector<Node> nodes;
  auto id = [&](std::size_t c, std::size_t r) { return r * opts.cols + c; };
  for (std::size_t r = 0; r < opts.rows; ++r)
    for (std::size_t c = 0; c < opts.cols; ++c) {
      const double x = static_cast<double>(c) * opts.spacing_m, y = static_cast<double>(r) * opts.spacing_m;
      nodes.push_back({"g" + std::to_string(r) + "_" + std::to_string(c), kLat + y / kR * deg,
                       kLon + x / (kR * cos_lat) * deg});
    }

  std::vector<Edge> edges;
  std::vector<Time> base, step;
  auto add = [&](std::size_t u, std::size_t v, bool arterial) {
    const double length = std::round(opts.spacing_m * (1.0 + 0.15 * unit(rng)));
    const double speed = arterial ? 13.9 : 8.3;
    edges.push_back({"s" + std::to_string(edges.size()), NodeId(static_cast<std::uint32_t>(u)),
                     NodeId(static_cast<std::uint32_t>(v)), length, speed});
    const Time t0 = static_cast<Time>(std::ceil(length / speed));
    base.push_back(t0);
    step.push_back(std::max<Time>(1, std::llround(static_cast<double>(t0) * (0.2 + 0.3 * unit(rng)))));
  };
  for (std::size_t r = 0; r < opts.rows; ++r)
    for (std::size_t c = 0; c < opts.cols; ++c) {
      if (c + 1 < opts.cols) {
        add(id(c, r), id(c + 1, r), r % 4 == 0);
        add(id(c + 1, r), id(c, r), r % 4 == 0);
      }
      if (r + 1 < opts.rows) {
        add(id(c, r), id(c, r + 1), c % 4 == 0);
        add(id(c, r + 1), id(c, r), c % 4 == 0);
      }
    }
  Instance inst{Network(std::move(nodes), std::move(edges), opts.resolution), {}};
  const Network& net = inst.net;

  // Trips: mostly-straight random walks sharing one congestion level, which
  // drifts now and then along the way.
  const std::size_t trips = opts.trips ? opts.trips : 5 * net.edge_count();
  std::uniform_int_distribution<std::uint32_t> pick_node(0, static_cast<std::uint32_t>(net.node_count() - 1));
  std::discrete_distribution<int> pick_level{0.5, 0.3, 0.2};
  for (std::size_t t = 0; t < trips; ++t) {
    NodeId v = NodeId(pick_node(rng));
    const std::size_t want = 4 + static_cast<std::size_t>(unit(rng) * 12.0);
    int level = pick_level(rng);
    std::vector<bool> seen(net.node_count(), false);
    seen[index_of(v)] = true;
    TrajectoryRecord rec;
    std::optional<EdgeId> prev;
    while (rec.edges.size() < want) {
      std::vector<EdgeId> options;
      std::optional<EdgeId> straight;
      for (EdgeId e : net.out_edges(v)) {
        const NodeId w = net.edge(e).to;
        if (seen[index_of(w)]) continue;
        options.push_back(e);
        if (prev) {
          const Node &a = net.node(net.edge(*prev).from), &b = net.node(v), &c = net.node(w);
          if (std::abs((b.lat - a.lat) - (c.lat - b.lat)) < 1e-9 && std::abs((b.lon - a.lon) - (c.lon - b.lon)) < 1e-9)
            straight = e;
        }
      }
      if (options.empty()) break;
      EdgeId e = options[static_cast<std::size_t>(unit(rng) * static_cast<double>(options.size())) % options.size()];
      if (straight && unit(rng) < 0.7) e = *straight;
      if (unit(rng) < 0.15) level = std::clamp(level + (unit(rng) < 0.5 ? -1 : 1), 0, 2);
      const Time noise = unit(rng) < 0.3 ? 1 : 0;
      rec.edges.push_back(e);
      rec.times.push_back(round_to_grid(static_cast<double>(base[index_of(e)] + level * step[index_of(e)] + noise), opts.resolution));
      v = net.edge(e).to;
      seen[index_of(v)] = true;
      prev = e;
    }
    if (!rec.edges.empty()) inst.trajectories.push_back(std::move(rec));
  }
  return inst;
}

}  // namespace spotar
