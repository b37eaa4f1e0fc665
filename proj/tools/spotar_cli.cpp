#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "spotar/bench.hpp"
#include "spotar/oracle.hpp"
#include "spotar/solver.hpp"
#include "spotar/weights.hpp"

namespace fs = std::filesystem;
using namespace spotar;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMismatch = 2;

// SPOTAR_LOG=quiet|info|debug (default info).
enum class Level { Quiet, Info, Debug };

Level log_level() {
  const char* v = std::getenv("SPOTAR_LOG");
  if (!v) return Level::Info;
  const std::string s(v);
  if (s == "quiet" || s == "0") return Level::Quiet;
  if (s == "debug" || s == "2") return Level::Debug;
  return Level::Info;
}

void log(Level at, const std::string& msg) {
  if (at <= log_level() && log_level() != Level::Quiet) std::cerr << msg << '\n';
}

void warn(const std::string& msg) {
  if (log_level() != Level::Quiet) std::cerr << "warning: " << msg << '\n';
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write '" + file.string() + "'");
  out << text;
}

// Two decimals when exact (p=0.70), otherwise six.
std::string short_prob(double p) {
  if (p == 0.0) return "0";
  char buf[32];
  const double cents = p * 100.0;
  std::snprintf(buf, sizeof buf, std::abs(cents - std::round(cents)) < 1e-9 ? "%.2f" : "%.6g", p);
  return buf;
}

struct Loaded {
  Network net;
  WeightStore store;
};

Loaded load_inputs(const fs::path& store_file, const fs::path& network_file) {
  Loaded in;
  in.net = load_network(network_file, store_resolution(store_file));
  in.store = load_store(store_file, in.net);
  log(Level::Debug, "loaded " + std::to_string(in.net.node_count()) + " nodes, " +
                        std::to_string(in.net.edge_count()) + " edges, " +
                        std::to_string(in.store.path_weights().size()) + " stored paths");
  return in;
}

struct BuildArgs {
  fs::path network, trajectories, out;
  std::int64_t min_support = 10;
  std::size_t max_unit_edges = 8;
  Time resolution = 1;
};

int cmd_build(const BuildArgs& a) {
  const Network net = load_network(a.network, a.resolution);
  const auto records = load_trajectories(a.trajectories, net);
  if (records.empty()) warn("no trajectories in '" + a.trajectories.string() + "'; every edge uses its fallback weight");
  StoreOptions opts;
  opts.min_support = a.min_support;
  opts.max_unit_edges = a.max_unit_edges;
  const WeightStore store = build_store(net, records, opts);
  save_store(store, net, a.out);
  std::cout << "edges: " << store.edge_count() << " (" << store.edge_count() - store.fallback_count()
            << " measured, " << store.fallback_count() << " fallback)\n"
            << "stored path weights: " << store.path_weights().size() << '\n'
            << "longest unit: " << store.longest_unit() << " edges\n"
            << "written: " << a.out.string() << '\n';
  return kExitOk;
}

struct QueryArgs {
  fs::path store, network, explored;
  std::string from, to, model = "pace", heuristic = "sp";
  Time budget = 0;
  bool dump_dist = false;
  bool trace = false;
};

int cmd_query(const QueryArgs& a) {
  const Loaded in = load_inputs(a.store, a.network);
  const Query q{in.net.node_by_name(a.from), in.net.node_by_name(a.to), a.budget};
  const CostModel model(in.store, parse_cost_mode(a.model));
  SolverOptions opts;
  opts.record_trace = a.trace;
  const SolveResult r = solve(in.net, model, parse_heuristic(a.heuristic), q, opts);

  if (a.trace)
    for (const TraceEvent& ev : r.trace) {
      std::cout << "# " << to_string(ev.kind);
      if (!ev.path.empty()) std::cout << ' ' << Path(in.net, ev.path).to_string(in.net);
      if (ev.kind == TraceEvent::Kind::PruneMinCost)
        std::cout << ' ' << ev.path_min << '+' << ev.edge_min << '+' << ev.node_min << '>' << q.budget;
      else if (ev.kind == TraceEvent::Kind::Purge)
        std::cout << " below " << ev.r << " removed " << ev.removed;
      else
        std::cout << " r=" << ev.r;
      std::cout << '\n';
    }

  if (r.found())
    std::cout << Path(in.net, r.best_path).to_string(in.net) << " p=" << short_prob(r.probability) << '\n';
  else
    std::cout << "NONE p=0\n";
  std::ostringstream p;
  p.precision(17);
  p << r.probability;
  std::cout << "probability: " << p.str() << '\n'
            << "explored_edges: " << r.explored_edges << '\n'
            << "expanded_labels: " << r.expanded_labels << '\n'
            << "wall_time_s: " << r.wall_time_s << '\n';
  if (a.dump_dist && r.best_cost) std::cout << "cost distribution (time:prob):\n" << format_histogram(*r.best_cost);

  if (!a.explored.empty()) {
    std::ostringstream out;
    out.precision(10);
    out << "edge_id,from,to,from_lat,from_lon,to_lat,to_lon,on_path\n";
    for (EdgeId e : r.explored) {
      const Edge& ed = in.net.edge(e);
      const Node &u = in.net.node(ed.from), &v = in.net.node(ed.to);
      const bool on_path = std::find(r.best_path.begin(), r.best_path.end(), e) != r.best_path.end();
      out << ed.name << ',' << u.name << ',' << v.name << ',' << u.lat << ',' << u.lon << ',' << v.lat << ','
          << v.lon << ',' << (on_path ? 1 : 0) << '\n';
    }
    write_text(a.explored, out.str());
  }
  return kExitOk;
}

struct BenchArgs {
  fs::path store, network, config, out;
  std::size_t threads = 0;
};

int cmd_bench(const BenchArgs& a) {
  const Loaded in = load_inputs(a.store, a.network);
  BenchConfig cfg = load_config(a.config);
  if (a.threads) cfg.threads = a.threads;
  const auto queries = gen_queries(in.net, cfg);
  log(Level::Info, "bench: " + std::to_string(queries.size()) + " queries x " + std::to_string(cfg.methods.size()) +
                       " methods");
  const auto rows = run_bench(in.net, in.store, cfg, queries);
  const fs::path agg = emit_csv(rows, a.out);
  std::cout << "rows: " << rows.size() << '\n' << "written: " << a.out.string() << ", " << agg.string() << '\n';
  return kExitOk;
}

struct VerifyArgs {
  std::uint64_t seed = 1;
  std::size_t instances = 30;
  std::size_t max_nodes = 10;
};

int cmd_verify(const VerifyArgs& a) {
  if (a.max_nodes < 2 || a.max_nodes > 12) throw ValidationError("--max-nodes must be in [2, 12]");
  if (a.instances == 0) {
    warn("--instances 0: nothing to verify");
    std::cout << "0 instances, 0 mismatches\n";
    return kExitOk;
  }
  VerifyOptions opts;
  opts.seed = a.seed;
  opts.instances = a.instances;
  opts.max_nodes = a.max_nodes;
  const auto rows = verify_instances(opts);
  std::size_t bad = 0;
  std::printf("%-8s %-5s %-3s %-14s %-14s %s\n", "seed", "model", "h", "solver_p", "oracle_p", "status");
  for (const VerifyRow& r : rows) {
    if (!r.ok) ++bad;
    std::printf("%-8llu %-5s %-3s %-14.10f %-14.10f %s\n", static_cast<unsigned long long>(r.seed),
                std::string(to_string(r.mode)).c_str(), std::string(to_string(r.heuristic)).c_str(), r.solver_p,
                r.oracle_p, r.ok ? "pass" : ("FAIL " + r.error).c_str());
  }
  std::cout << a.instances << " instances, " << rows.size() << " runs, " << bad << " mismatches\n";
  if (bad) {
    std::cout << "replay failing instances with: --seed <seed> --instances 1\n";
    return kExitMismatch;
  }
  return kExitOk;
}

struct GenArgs {
  std::string kind = "grid";
  std::uint64_t seed = 1;
  fs::path out_dir = ".";
  GridOptions grid;
  std::size_t nodes = 8;
  double density = 0.3;
  double joint_fraction = 0.5;
};

int cmd_gen(const GenArgs& a) {
  Instance inst = a.kind == "grid" ? gen_city_grid(a.seed, a.grid)
                                   : gen_instance(a.seed, a.nodes, a.density, a.joint_fraction);
  fs::create_directories(a.out_dir);
  write_network(inst.net, a.out_dir / "network.csv");
  write_text(a.out_dir / "trajectories.csv", format_trajectories(inst.trajectories, inst.net));
  std::cout << "nodes: " << inst.net.node_count() << ", edges: " << inst.net.edge_count()
            << ", trajectory records: " << inst.trajectories.size() << '\n'
            << "time resolution: " << inst.net.resolution() << " (pass --resolution "
            << inst.net.resolution() << " to build)\n"
            << "written: " << (a.out_dir / "network.csv").string() << ", "
            << (a.out_dir / "trajectories.csv").string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic routing with on-time arrival reliability"};
  app.require_subcommand(1);

  BuildArgs build;
  auto* b = app.add_subcommand("build", "Build a weight store from trajectories");
  b->add_option("--network", build.network, "Network CSV")->required()->check(CLI::ExistingFile);
  b->add_option("--trajectories", build.trajectories, "Trajectory CSV")->required()->check(CLI::ExistingFile);
  b->add_option("--min-support", build.min_support, "Least trajectory count for a stored path weight")
      ->capture_default_str();
  b->add_option("--max-unit-edges", build.max_unit_edges, "Longest stored path weight")->capture_default_str();
  b->add_option("--resolution", build.resolution, "Time grid step")->capture_default_str();
  b->add_option("--out", build.out, "Output store (JSON)")->required();

  QueryArgs query;
  auto* q = app.add_subcommand("query", "Answer one routing query");
  q->add_option("--store", query.store, "Weight store")->required()->check(CLI::ExistingFile);
  q->add_option("--network", query.network, "Network CSV")->required()->check(CLI::ExistingFile);
  q->add_option("--from", query.from, "Source node id")->required();
  q->add_option("--to", query.to, "Destination node id")->required();
  q->add_option("--budget", query.budget, "Time budget")->required();
  q->add_option("--model", query.model, "pace|edge")->capture_default_str();
  q->add_option("--heuristic", query.heuristic, "sp|ba")->capture_default_str();
  q->add_flag("--dump-dist", query.dump_dist, "Print the travel-time distribution of the result");
  q->add_flag("--trace", query.trace, "Print the search transcript");
  q->add_option("--explored", query.explored, "Write explored edges with coordinates to this CSV");

  BenchArgs bench;
  auto* be = app.add_subcommand("bench", "Run the benchmark described by a config file");
  be->add_option("--store", bench.store, "Weight store")->required()->check(CLI::ExistingFile);
  be->add_option("--network", bench.network, "Network CSV")->required()->check(CLI::ExistingFile);
  be->add_option("--config", bench.config, "Bench config")->required()->check(CLI::ExistingFile);
  be->add_option("--out", bench.out, "Output CSV")->required();
  be->add_option("--threads", bench.threads, "Override the config's worker count");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Check the solver against exhaustive enumeration");
  v->add_option("--seed", verify.seed, "First instance seed")->capture_default_str();
  v->add_option("--instances", verify.instances, "Number of random instances")->capture_default_str();
  v->add_option("--max-nodes", verify.max_nodes, "Largest instance size")->capture_default_str();

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate a synthetic network and trajectories");
  g->add_option("kind", gen.kind, "grid|random")->check(CLI::IsMember({"grid", "random"}))->capture_default_str();
  g->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  g->add_option("--out-dir", gen.out_dir, "Output directory")->capture_default_str();
  g->add_option("--cols", gen.grid.cols, "Grid columns")->capture_default_str();
  g->add_option("--rows", gen.grid.rows, "Grid rows")->capture_default_str();
  g->add_option("--spacing", gen.grid.spacing_m, "Grid block length in meters")->capture_default_str();
  g->add_option("--trips", gen.grid.trips, "Grid trips (0: five per edge)")->capture_default_str();
  g->add_option("--resolution", gen.grid.resolution, "Grid time step in seconds")->capture_default_str();
  g->add_option("--nodes", gen.nodes, "Random instance nodes")->capture_default_str();
  g->add_option("--density", gen.density, "Random instance edge density")->capture_default_str();
  g->add_option("--joint-fraction", gen.joint_fraction, "Share of 2-3 edge sub-paths with stored weights")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (b->parsed()) return cmd_build(build);
    if (q->parsed()) return cmd_query(query);
    if (be->parsed()) return cmd_bench(bench);
    if (v->parsed()) return cmd_verify(verify);
    if (g->parsed()) return cmd_gen(gen);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
