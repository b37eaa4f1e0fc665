#include "spotar/network.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "text_util.hpp"

namespace spotar {

namespace {

constexpr double kEarthRadiusM = 6371008.8;

}  // namespace

double equirectangular_m(double lat_a, double lon_a, double lat_b, double lon_b) {
  constexpr double rad = std::numbers::pi / 180.0;
  const double mean_lat = 0.5 * (lat_a + lat_b) * rad;
  const double x = (lon_b - lon_a) * rad * std::cos(mean_lat);
  const double y = (lat_b - lat_a) * rad;
  return kEarthRadiusM * std::sqrt(x * x + y * y);
}

Network::Network(std::vector<Node> nodes, std::vector<Edge> edges, Time resolution)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), resolution_(resolution) {
  if (resolution_ <= 0) throw ValidationError("time resolution must be positive");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!node_index_.emplace(nodes_[i].name, NodeId(i)).second)
      throw ValidationError("duplicate node id '" + nodes_[i].name + "'");
  }
  std::vector<std::size_t> degree(nodes_.size(), 0);
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    const Edge& e = edges_[i];
    if (!edge_index_.emplace(e.name, EdgeId(i)).second)
      throw ValidationError("duplicate edge id '" + e.name + "'");
    if (index_of(e.from) >= nodes_.size() || index_of(e.to) >= nodes_.size())
      throw ValidationError("edge '" + e.name + "' references an unknown node");
    if (!(e.length_m > 0.0)) throw ValidationError("edge '" + e.name + "' has non-positive length");
    if (!(e.speed_limit > 0.0))
      throw ValidationError("edge '" + e.name + "' has non-positive speed limit");
    max_speed_ = std::max(max_speed_, e.speed_limit);
    ++degree[index_of(e.from)];
  }
  out_offsets_.assign(nodes_.size() + 1, 0);
  for (std::size_t v = 0; v < nodes_.size(); ++v) out_offsets_[v + 1] = out_offsets_[v] + degree[v];
  out_list_.resize(edges_.size());
  std::vector<std::size_t> fill(out_offsets_.begin(), out_offsets_.end() - 1);
  for (std::size_t i = 0; i < edges_.size(); ++i)
    out_list_[fill[index_of(edges_[i].from)]++] = EdgeId(i);
}

std::span<const EdgeId> Network::out_edges(NodeId n) const {
  const auto v = index_of(n);
  return {out_list_.data() + out_offsets_[v], out_offsets_[v + 1] - out_offsets_[v]};
}

std::size_t Network::in_degree(NodeId n) const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [n](const Edge& e) { return e.to == n; }));
}

std::optional<NodeId> Network::find_node(std::string_view name) const {
  auto it = node_index_.find(std::string(name));
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<EdgeId> Network::find_edge(std::string_view name) const {
  auto it = edge_index_.find(std::string(name));
  if (it == edge_index_.end()) return std::nullopt;
  return it->second;
}

NodeId Network::node_by_name(std::string_view name) const {
  if (auto n = find_node(name)) return *n;
  throw ValidationError("unknown node '" + std::string(name) + "'");
}

EdgeId Network::edge_by_name(std::string_view name) const {
  if (auto e = find_edge(name)) return *e;
  throw ValidationError("unknown edge '" + std::string(name) + "'");
}

double Network::distance_m(NodeId a, NodeId b) const {
  const Node& x = node(a);
  const Node& y = node(b);
  return equirectangular_m(x.lat, x.lon, y.lat, y.lon);
}

Network Network::reversed() const {
  std::vector<Edge> flipped = edges_;
  for (Edge& e : flipped) std::swap(e.from, e.to);
  return Network(nodes_, std::move(flipped), resolution_);
}

bool operator==(const Network& a, const Network& b) {
  if (a.resolution_ != b.resolution_ || a.nodes_.size() != b.nodes_.size() ||
      a.edges_.size() != b.edges_.size())
    return false;
  for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
    const Node& x = a.nodes_[i];
    const Node& y = b.nodes_[i];
    if (x.name != y.name || x.lat != y.lat || x.lon != y.lon) return false;
  }
  for (std::size_t i = 0; i < a.edges_.size(); ++i) {
    const Edge& x = a.edges_[i];
    const Edge& y = b.edges_[i];
    if (x.name != y.name || x.from != y.from || x.to != y.to || x.length_m != y.length_m ||
        x.speed_limit != y.speed_limit)
      return false;
  }
  return true;
}

Network parse_network(std::string_view text, const std::string& source, Time resolution) {
  enum class Section { None, Nodes, Edges } section = Section::None;
  std::vector<Node> nodes;
  std::vector<Edge> edges;
  std::unordered_map<std::string, NodeId> ids;
  std::size_t line_no = 0;
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '#') {
      if (line == "#nodes")
        section = Section::Nodes;
      else if (line == "#edges")
        section = Section::Edges;
      else
        throw ParseError(source, line_no, "unknown section header '" + std::string(line) + "'");
      continue;
    }
    auto fields = detail::split(line, ',');
    try {
      switch (section) {
        case Section::None:
          throw ParseError(source, line_no, "data before '#nodes' / '#edges' header");
        case Section::Nodes: {
          if (fields.size() != 3) throw ParseError(source, line_no, "expected node_id,lat,lon");
          Node n{std::string(detail::trim(fields[0])), detail::parse_double(fields[1]),
                 detail::parse_double(fields[2])};
          if (n.name.empty()) throw ParseError(source, line_no, "empty node id");
          if (!ids.emplace(n.name, NodeId(nodes.size())).second)
            throw ParseError(source, line_no, "duplicate node id '" + n.name + "'");
          nodes.push_back(std::move(n));
          break;
        }
        case Section::Edges: {
          if (fields.size() != 5)
            throw ParseError(source, line_no, "expected edge_id,from,to,length_m,speed_limit_mps");
          auto endpoint = [&](std::string_view f) {
            auto it = ids.find(std::string(detail::trim(f)));
            if (it == ids.end())
              throw ParseError(source, line_no,
                               "edge references unknown node '" + std::string(detail::trim(f)) + "'");
            return it->second;
          };
          Edge e{std::string(detail::trim(fields[0])), endpoint(fields[1]), endpoint(fields[2]),
                 detail::parse_double(fields[3]), detail::parse_double(fields[4])};
          if (!(e.length_m > 0.0)) throw ParseError(source, line_no, "non-positive length");
          if (!(e.speed_limit > 0.0)) throw ParseError(source, line_no, "non-positive speed limit");
          edges.push_back(std::move(e));
          break;
        }
      }
    } catch (const detail::FieldError& fe) {
      throw ParseError(source, line_no, fe.what());
    }
  }
  try {
    return Network(std::move(nodes), std::move(edges), resolution);
  } catch (const ValidationError& ve) {
    throw ParseError(source, 0, ve.what());
  }
}

Network load_network(const std::filesystem::path& file, Time resolution) {
  return parse_network(detail::read_file(file), file.string(), resolution);
}

std::string format_network(const Network& net) {
  std::ostringstream out;
  out.precision(17);
  out << "#nodes\n";
  for (const Node& n : net.nodes()) out << n.name << ',' << n.lat << ',' << n.lon << '\n';
  out << "#edges\n";
  for (const Edge& e : net.edges())
    out << e.name << ',' << net.node(e.from).name << ',' << net.node(e.to).name << ','
        << e.length_m << ',' << e.speed_limit << '\n';
  return out.str();
}

void write_network(const Network& net, const std::filesystem::path& file) {
  detail::write_file(file, format_network(net));
}

void validate_path(const Network& net, std::span<const EdgeId> edges) {
  if (edges.empty()) throw ValidationError("path must contain at least one edge");
  std::unordered_set<std::uint32_t> seen;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (index_of(edges[i]) >= net.edge_count()) throw ValidationError("path references unknown edge");
    if (!seen.insert(index_of(edges[i])).second)
      throw ValidationError("path repeats edge '" + net.edge(edges[i]).name + "'");
    if (i > 0 && net.edge(edges[i - 1]).to != net.edge(edges[i]).from)
      throw ValidationError("edges '" + net.edge(edges[i - 1]).name + "' and '" +
                            net.edge(edges[i]).name + "' are not adjacent");
  }
}

Path::Path(const Network& net, std::vector<EdgeId> edges) : edges_(std::move(edges)) {
  validate_path(net, edges_);
}

Path Path::extended(const Network& net, EdgeId e) const {
  std::vector<EdgeId> next = edges_;
  next.push_back(e);
  return Path(net, std::move(next));
}

std::string Path::to_string(const Network& net) const {
  std::string s = "<";
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (i) s += ',';
    s += net.edge(edges_[i]).name;
  }
  return s + ">";
}

bool is_subpath(std::span<const EdgeId> inner, std::span<const EdgeId> outer) {
  if (inner.empty() || inner.size() > outer.size()) return false;
  return std::search(outer.begin(), outer.end(), inner.begin(), inner.end()) != outer.end();
}

void validate_query(const Network& net, const Query& q) {
  if (index_of(q.source) >= net.node_count() || index_of(q.destination) >= net.node_count())
    throw ValidationError("query references an unknown node");
  if (q.source == q.destination) throw ValidationError("source and destination must differ");
  if (q.budget <= 0) throw ValidationError("budget must be positive");
  if (q.budget % net.resolution() != 0)
    throw ValidationError("budget must be a multiple of the time resolution");
}

}  // namespace spotar
