#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spotar/oracle.hpp"
#include "spotar/solver.hpp"
#include "spotar/weights.hpp"

namespace py = pybind11;
using namespace spotar;

namespace {

// A network with its weight store, kept together so the store outlives queries.
class Engine {
 public:
  Engine(Network net, WeightStore store) : net_(std::move(net)), store_(std::move(store)) {}

  static Engine load(const std::filesystem::path& network, const std::filesystem::path& store) {
    Network net = load_network(network, store_resolution(store));
    WeightStore s = load_store(store, net);
    return Engine(std::move(net), std::move(s));
  }

  static Engine build(const std::filesystem::path& network, const std::filesystem::path& trajectories,
                      Time resolution, std::int64_t min_support, std::size_t max_unit_edges) {
    Network net = load_network(network, resolution);
    StoreOptions o;
    o.min_support = min_support;
    o.max_unit_edges = max_unit_edges;
    WeightStore s = build_store(net, load_trajectories(trajectories, net), o);
    return Engine(std::move(net), std::move(s));
  }

  py::dict query(const std::string& from, const std::string& to, Time budget, const std::string& model,
                 const std::string& heuristic) const {
    const Query q{net_.node_by_name(from), net_.node_by_name(to), budget};
    const CostModel cost_model(store_, parse_cost_mode(model));
    const HeuristicKind kind = parse_heuristic(heuristic);
    SolveResult r;
    {
      py::gil_scoped_release nogil;
      r = solve(net_, cost_model, kind, q);
    }
    py::dict out;
    std::vector<std::string> path;
    for (EdgeId e : r.best_path) path.push_back(net_.edge(e).name);
    out["path"] = path;
    out["probability"] = r.probability;
    out["explored_edges"] = r.explored_edges;
    out["expanded_labels"] = r.expanded_labels;
    out["wall_time_s"] = r.wall_time_s;
    out["cost"] = r.best_cost ? r.best_cost->entries() : std::vector<Histogram::Entry>{};
    return out;
  }

  std::vector<Histogram::Entry> path_cost(const std::vector<std::string>& edges, const std::string& model) const {
    std::vector<EdgeId> ids;
    for (const auto& e : edges) ids.push_back(net_.edge_by_name(e));
    validate_path(net_, ids);
    return to_cost(path_joint(CostModel(store_, parse_cost_mode(model)), ids)).entries();
  }

  std::size_t node_count() const { return net_.node_count(); }
  std::size_t edge_count() const { return net_.edge_count(); }
  std::size_t stored_paths() const { return store_.path_weights().size(); }
  std::string store_json() const { return format_store(store_, net_); }

 private:
  Network net_;
  WeightStore store_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Stochastic routing with on-time arrival reliability";

  py::register_exception<Error>(m, "SpotarError", PyExc_ValueError);

  py::class_<Engine>(m, "Engine")
      .def_static("load", &Engine::load, py::arg("network"), py::arg("store"))
      .def_static("build", &Engine::build, py::arg("network"), py::arg("trajectories"), py::arg("resolution") = 1,
                  py::arg("min_support") = 10, py::arg("max_unit_edges") = 8)
      .def("query", &Engine::query, py::arg("source"), py::arg("destination"), py::arg("budget"),
           py::arg("model") = "pace", py::arg("heuristic") = "sp")
      .def("path_cost", &Engine::path_cost, py::arg("edges"), py::arg("model") = "pace")
      .def_property_readonly("node_count", &Engine::node_count)
      .def_property_readonly("edge_count", &Engine::edge_count)
      .def_property_readonly("stored_paths", &Engine::stored_paths)
      .def("store_json", &Engine::store_json);

  m.def(
      "convolve",
      [](std::vector<Histogram::Entry> a, std::vector<Histogram::Entry> b) {
        return convolve(Histogram(std::move(a)), Histogram(std::move(b))).entries();
      },
      py::arg("a"), py::arg("b"));

  m.def(
      "verify",
      [](std::uint64_t seed, std::size_t instances, std::size_t max_nodes) {
        VerifyOptions o;
        o.seed = seed;
        o.instances = instances;
        o.max_nodes = max_nodes;
        std::size_t bad = 0;
        for (const VerifyRow& r : verify_instances(o)) bad += r.ok ? 0 : 1;
        return bad;
      },
      py::arg("seed") = 1, py::arg("instances") = 30, py::arg("max_nodes") = 10,
      "Runs the solver against exhaustive enumeration; returns the mismatch count.");
}
