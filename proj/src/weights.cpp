#include "spotar/weights.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "text_util.hpp"

namespace spotar {

using json = nlohmann::json;

namespace detail {

std::size_t EdgeSeqHash::operator()(const std::vector<EdgeId>& seq) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (EdgeId e : seq) {
    h ^= index_of(e) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

}  // namespace detail

Time round_to_grid(double t, Time resolution) {
  const auto steps = static_cast<Time>(std::floor(t / static_cast<double>(resolution) + 0.5));
  return std::max<Time>(steps, 1) * resolution;
}

std::vector<TrajectoryRecord> parse_trajectories(std::string_view text, const Network& net,
                                                 const std::string& source) {
  std::vector<TrajectoryRecord> out;
  std::size_t line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos)
      throw ParseError(source, line_no, "expected count,edge:time;...");
    TrajectoryRecord rec;
    try {
      rec.count = detail::parse_int(line.substr(0, comma));
      if (rec.count < 1) throw ParseError(source, line_no, "count must be >= 1");
      for (std::string_view item : detail::split(line.substr(comma + 1), ';')) {
        item = detail::trim(item);
        if (item.empty()) continue;
        const auto colon = item.rfind(':');
        if (colon == std::string_view::npos)
          throw ParseError(source, line_no, "expected edge:time, got '" + std::string(item) + "'");
        auto edge = net.find_edge(detail::trim(item.substr(0, colon)));
        if (!edge)
          throw ParseError(source, line_no,
                           "unknown edge '" + std::string(detail::trim(item.substr(0, colon))) + "'");
        rec.edges.push_back(*edge);
        rec.times.push_back(
            round_to_grid(detail::parse_double(item.substr(colon + 1)), net.resolution()));
      }
    } catch (const detail::FieldError& fe) {
      throw ParseError(source, line_no, fe.what());
    }
    try {
      validate_path(net, rec.edges);
    } catch (const ValidationError& ve) {
      throw ParseError(source, line_no, ve.what());
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<TrajectoryRecord> load_trajectories(const std::filesystem::path& file,
                                                const Network& net) {
  return parse_trajectories(detail::read_file(file), net, file.string());
}

std::string format_trajectories(std::span<const TrajectoryRecord> records, const Network& net) {
  std::string out;
  for (const auto& r : records) {
    out += std::to_string(r.count);
    out += ',';
    for (std::size_t i = 0; i < r.edges.size(); ++i) {
      if (i) out += ';';
      out += net.edge(r.edges[i]).name;
      out += ':';
      out += std::to_string(r.times[i]);
    }
    out += '\n';
  }
  return out;
}

namespace {

FusionUnit make_unit(std::vector<EdgeId> edges, const JointDist::Rows& rows) {
  FusionUnit unit;
  unit.edges = std::move(edges);
  const std::size_t len = unit.edges.size();
  unit.conditional.resize(len);
  for (std::size_t o = 0; o < len; ++o) {
    std::map<std::vector<Time>, double> overlap_mass;
    for (const auto& [key, p] : rows)
      overlap_mass[std::vector<Time>(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(o))] += p;
    for (const auto& [key, p] : rows) {
      std::vector<Time> head(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(o));
      std::vector<Time> rest(key.begin() + static_cast<std::ptrdiff_t>(o), key.end());
      const double denom = overlap_mass[head];
      unit.conditional[o][std::move(head)].emplace_back(std::move(rest), p / denom);
    }
  }
  return unit;
}

}  // namespace

WeightStore::WeightStore(const Network& net, std::vector<Histogram> edge_weights,
                         std::vector<bool> measured,
                         std::vector<std::pair<std::vector<EdgeId>, PathWeight>> path_weights,
                         StoreOptions options)
    : edge_weights_(std::move(edge_weights)),
      measured_(std::move(measured)),
      options_(options),
      resolution_(net.resolution()) {
  if (options_.min_support < 1) throw ValidationError("min_support must be >= 1");
  if (options_.max_unit_edges < 1) throw ValidationError("max_unit_edges must be >= 1");
  if (edge_weights_.size() != net.edge_count())
    throw ValidationError("weight store needs one histogram per edge");
  if (measured_.empty()) measured_.assign(edge_weights_.size(), true);
  if (measured_.size() != edge_weights_.size())
    throw ValidationError("measured flags do not match the edge count");

  min_edge_time_.resize(edge_weights_.size());
  edge_units_.reserve(edge_weights_.size());
  for (std::size_t i = 0; i < edge_weights_.size(); ++i) {
    const Histogram& h = edge_weights_[i];
    if (h.empty()) throw ValidationError("edge '" + net.edges()[i].name + "' has no weight");
    if (h.resolution() != resolution_)
      throw ValidationError("edge '" + net.edges()[i].name + "' weight uses another resolution");
    if (h.min_time() < resolution_)
      throw ValidationError("edge '" + net.edges()[i].name + "' weight has a time below resolution");
    min_edge_time_[i] = h.min_time();
    edge_units_.push_back(make_unit({EdgeId(i)}, JointDist::from_histogram(EdgeId(i), h).rows()));
  }

  for (auto& [edges, weight] : path_weights) {
    validate_path(net, edges);
    if (edges.size() < 2) throw ValidationError("path weights must span at least two edges");
    if (edges.size() > options_.max_unit_edges)
      throw ValidationError("path weight longer than max_unit_edges");
    if (weight.joint.edges() != edges) throw ValidationError("path weight joint edge order mismatch");
    if (weight.joint.resolution() != resolution_)
      throw ValidationError("path weight uses another resolution");
    if (weight.support < options_.min_support)
      throw ValidationError("path weight support below min_support");
    for (const auto& [key, p] : weight.joint.rows()) {
      for (std::size_t k = 0; k < key.size(); ++k) {
        if (key[k] < resolution_) throw ValidationError("path weight has a time below resolution");
        auto& m = min_edge_time_[index_of(edges[k])];
        m = std::min(m, key[k]);
      }
    }
    longest_unit_ = std::max(longest_unit_, edges.size());
    path_units_.emplace(edges, make_unit(edges, weight.joint.rows()));
    for (std::size_t k = 1; k < edges.size(); ++k)
      proper_prefixes_.emplace(edges.begin(), edges.begin() + static_cast<std::ptrdiff_t>(k));
    if (!path_weights_.emplace(edges, std::move(weight)).second)
      throw ValidationError("duplicate path weight");
  }
}

std::size_t WeightStore::fallback_count() const {
  return static_cast<std::size_t>(std::count(measured_.begin(), measured_.end(), false));
}

const PathWeight* WeightStore::find_path_weight(std::span<const EdgeId> edges) const {
  auto it = path_weights_.find(std::vector<EdgeId>(edges.begin(), edges.end()));
  return it == path_weights_.end() ? nullptr : &it->second;
}

bool WeightStore::extends_into_unit(std::span<const EdgeId> edges) const {
  if (proper_prefixes_.empty()) return false;
  return proper_prefixes_.contains(std::vector<EdgeId>(edges.begin(), edges.end()));
}

const FusionUnit* WeightStore::path_unit(std::span<const EdgeId> edges) const {
  if (edges.size() == 1) return &edge_units_[index_of(edges.front())];
  if (path_units_.empty()) return nullptr;
  auto it = path_units_.find(std::vector<EdgeId>(edges.begin(), edges.end()));
  return it == path_units_.end() ? nullptr : &it->second;
}

WeightStore build_store(const Network& net, std::span<const TrajectoryRecord> trajectories,
                        StoreOptions options) {
  if (options.min_support < 1) throw ValidationError("min_support must be >= 1");
  const Time res = net.resolution();
  std::vector<std::map<Time, std::int64_t>> observations(net.edge_count());
  std::map<std::vector<EdgeId>, std::map<std::vector<Time>, std::int64_t>> sub_paths;

  for (const auto& rec : trajectories) {
    validate_path(net, rec.edges);
    if (rec.times.size() != rec.edges.size())
      throw ValidationError("trajectory has " + std::to_string(rec.times.size()) + " times for " +
                            std::to_string(rec.edges.size()) + " edges");
    if (rec.count < 1) throw ValidationError("trajectory count must be >= 1");
    for (Time t : rec.times)
      if (t < res || t % res != 0) throw ValidationError("trajectory time off the grid");
    for (std::size_t i = 0; i < rec.edges.size(); ++i)
      observations[index_of(rec.edges[i])][rec.times[i]] += rec.count;
    for (std::size_t i = 0; i < rec.edges.size(); ++i) {
      const std::size_t max_len = std::min(options.max_unit_edges, rec.edges.size() - i);
      for (std::size_t len = 2; len <= max_len; ++len) {
        auto first = static_cast<std::ptrdiff_t>(i);
        auto last = static_cast<std::ptrdiff_t>(i + len);
        std::vector<EdgeId> key(rec.edges.begin() + first, rec.edges.begin() + last);
        std::vector<Time> times(rec.times.begin() + first, rec.times.begin() + last);
        sub_paths[std::move(key)][std::move(times)] += rec.count;
      }
    }
  }

  std::vector<Histogram> edge_weights;
  std::vector<bool> measured;
  edge_weights.reserve(net.edge_count());
  for (std::size_t i = 0; i < net.edge_count(); ++i) {
    if (observations[i].empty()) {
      const Edge& e = net.edges()[i];
      edge_weights.push_back(Histogram::point_mass(round_to_grid(e.length_m / e.speed_limit, res), res));
      measured.push_back(false);
      continue;
    }
    std::vector<Histogram::Entry> w;
    for (const auto& [t, c] : observations[i]) w.emplace_back(t, static_cast<double>(c));
    edge_weights.push_back(Histogram::from_weights(std::move(w), res));
    measured.push_back(true);
  }

  std::vector<std::pair<std::vector<EdgeId>, PathWeight>> paths;
  for (auto& [edges, counts] : sub_paths) {
    std::int64_t support = 0;
    for (const auto& kv : counts) support += kv.second;
    if (support < options.min_support) continue;
    JointDist::Rows rows;
    for (const auto& [times, c] : counts) rows.emplace(times, static_cast<double>(c));
    paths.emplace_back(edges, PathWeight{JointDist::from_weights(edges, std::move(rows), res), support});
  }
  return WeightStore(net, std::move(edge_weights), std::move(measured), std::move(paths), options);
}

std::string format_store(const WeightStore& store, const Network& net) {
  // Header fields first, then one edge or path object per line.
  std::string out = "{\"format\":\"spotar-weights\",\"version\":1";
  out += ",\"resolution\":" + std::to_string(store.resolution());
  out += ",\"min_support\":" + std::to_string(store.options().min_support);
  out += ",\"max_unit_edges\":" + std::to_string(store.options().max_unit_edges);
  out += ",\n\"edges\":[";
  for (std::size_t i = 0; i < store.edge_count(); ++i) {
    json hist = json::array();
    for (const auto& [t, p] : store.edge_weight(EdgeId(i)).entries()) hist.push_back({t, p});
    const json e{{"id", net.edges()[i].name},
                 {"measured", static_cast<bool>(store.measured(EdgeId(i)))},
                 {"hist", std::move(hist)}};
    out += (i ? ",\n" : "\n") + e.dump();
  }
  out += "],\n\"paths\":[";
  bool first = true;
  for (const auto& [seq, weight] : store.path_weights()) {
    json ids = json::array();
    for (EdgeId e : seq) ids.push_back(net.edge(e).name);
    json rows = json::array();
    for (const auto& [key, p] : weight.joint.rows()) rows.push_back({key, p});
    const json pw{{"edges", std::move(ids)}, {"support", weight.support}, {"rows", std::move(rows)}};
    out += (first ? "\n" : ",\n") + pw.dump();
    first = false;
  }
  out += "]}\n";
  return out;
}

WeightStore parse_store(std::string_view text, const Network& net, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, e.what());
  }
  try {
    if (doc.at("format").get<std::string>() != "spotar-weights")
      throw ParseError(source, 0, "not a spotar weight store");
    if (doc.at("version").get<int>() != 1)
      throw ParseError(source, 0, "unsupported store version " + doc.at("version").dump());
    const Time res = doc.at("resolution").get<Time>();
    if (res != net.resolution())
      throw ParseError(source, 0, "store resolution does not match the network");
    StoreOptions options;
    options.min_support = doc.at("min_support").get<std::int64_t>();
    options.max_unit_edges = doc.at("max_unit_edges").get<std::size_t>();

    const auto& edges = doc.at("edges");
    if (edges.size() != net.edge_count())
      throw ParseError(source, 0, "store lists " + std::to_string(edges.size()) +
                                      " edges, network has " + std::to_string(net.edge_count()));
    std::vector<Histogram> hists(net.edge_count());
    std::vector<bool> measured(net.edge_count(), true);
    std::vector<bool> seen(net.edge_count(), false);
    for (const auto& item : edges) {
      const EdgeId e = net.edge_by_name(item.at("id").get<std::string>());
      if (seen[index_of(e)]) throw ParseError(source, 0, "edge listed twice in store");
      seen[index_of(e)] = true;
      std::vector<Histogram::Entry> entries;
      for (const auto& pair : item.at("hist")) entries.emplace_back(pair.at(0).get<Time>(), pair.at(1).get<double>());
      hists[index_of(e)] = Histogram(std::move(entries), res);
      measured[index_of(e)] = item.at("measured").get<bool>();
    }
    std::vector<std::pair<std::vector<EdgeId>, PathWeight>> paths;
    for (const auto& item : doc.at("paths")) {
      std::vector<EdgeId> seq;
      for (const auto& id : item.at("edges")) seq.push_back(net.edge_by_name(id.get<std::string>()));
      JointDist::Rows rows;
      for (const auto& row : item.at("rows")) rows.emplace(row.at(0).get<std::vector<Time>>(), row.at(1).get<double>());
      paths.emplace_back(seq, PathWeight{JointDist(seq, std::move(rows), res), item.at("support").get<std::int64_t>()});
    }
    return WeightStore(net, std::move(hists), std::move(measured), std::move(paths), options);
  } catch (const json::exception& e) {
    throw ParseError(source, 0, e.what());
  } catch (const ValidationError& e) {
    throw ParseError(source, 0, e.what());
  }
}

void save_store(const WeightStore& store, const Network& net, const std::filesystem::path& file) {
  detail::write_file(file, format_store(store, net));
}

WeightStore load_store(const std::filesystem::path& file, const Network& net) {
  return parse_store(detail::read_file(file), net, file.string());
}

Time store_resolution(const std::filesystem::path& file) {
  try {
    return json::parse(detail::read_file(file)).at("resolution").get<Time>();
  } catch (const json::exception& e) {
    throw ParseError(file.string(), 0, e.what());
  }
}

std::string_view to_string(CostMode m) { return m == CostMode::Edge ? "edge" : "pace"; }

CostMode parse_cost_mode(std::string_view s) {
  if (s == "edge" || s == "EDGE") return CostMode::Edge;
  if (s == "pace" || s == "PACE") return CostMode::Pace;
  throw ValidationError("unknown cost model '" + std::string(s) + "' (expected pace|edge)");
}

}  // namespace spotar
