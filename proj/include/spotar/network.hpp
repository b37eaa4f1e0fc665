#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "spotar/types.hpp"

namespace spotar {

struct Node {
  std::string name;
  double lat = 0.0;  // degrees
  double lon = 0.0;  // degrees
};

struct Edge {
  std::string name;
  NodeId from{};
  NodeId to{};
  double length_m = 0.0;
  // Meters per time unit (m/s when the time unit is the second).
  double speed_limit = 0.0;
};

// Immutable directed road graph. Multi-edges are allowed; edges are
// addressed by id, never by node pair.
class Network {
 public:
  Network() = default;
  // Throws ValidationError on duplicate names, dangling endpoints or
  // non-positive length / speed.
  Network(std::vector<Node> nodes, std::vector<Edge> edges, Time resolution = 1);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const Node& node(NodeId n) const { return nodes_[index_of(n)]; }
  const Edge& edge(EdgeId e) const { return edges_[index_of(e)]; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::span<const EdgeId> out_edges(NodeId n) const;
  std::size_t in_degree(NodeId n) const;

  std::optional<NodeId> find_node(std::string_view name) const;
  std::optional<EdgeId> find_edge(std::string_view name) const;
  NodeId node_by_name(std::string_view name) const;  // throws ValidationError
  EdgeId edge_by_name(std::string_view name) const;  // throws ValidationError

  double max_speed() const { return max_speed_; }
  Time resolution() const { return resolution_; }

  // Straight-line distance in meters (equirectangular projection).
  double distance_m(NodeId a, NodeId b) const;

  // Same nodes, every edge flipped; ids and attributes preserved.
  Network reversed() const;

  friend bool operator==(const Network& a, const Network& b);

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> out_offsets_;
  std::vector<EdgeId> out_list_;
  std::unordered_map<std::string, NodeId> node_index_;
  std::unordered_map<std::string, EdgeId> edge_index_;
  double max_speed_ = 0.0;
  Time resolution_ = 1;
};

double equirectangular_m(double lat_a, double lon_a, double lat_b, double lon_b);

Network load_network(const std::filesystem::path& file, Time resolution = 1);
Network parse_network(std::string_view text, const std::string& source = "<network>",
                      Time resolution = 1);
std::string format_network(const Network& net);
void write_network(const Network& net, const std::filesystem::path& file);

// Ordered edge sequence; non-empty, adjacent and edge-unique by construction.
class Path {
 public:
  Path(const Network& net, std::vector<EdgeId> edges);

  const std::vector<EdgeId>& edges() const { return edges_; }
  std::size_t size() const { return edges_.size(); }
  EdgeId front() const { return edges_.front(); }
  EdgeId back() const { return edges_.back(); }
  NodeId source(const Network& net) const { return net.edge(edges_.front()).from; }
  NodeId target(const Network& net) const { return net.edge(edges_.back()).to; }

  Path extended(const Network& net, EdgeId e) const;
  std::string to_string(const Network& net) const;

  friend bool operator==(const Path&, const Path&) = default;
  friend auto operator<=>(const Path&, const Path&) = default;

 private:
  std::vector<EdgeId> edges_;
};

// Throws ValidationError naming the problem.
void validate_path(const Network& net, std::span<const EdgeId> edges);

// True iff `inner` is a contiguous run of `outer`.
bool is_subpath(std::span<const EdgeId> inner, std::span<const EdgeId> outer);
inline bool is_subpath(const Path& inner, const Path& outer) {
  return is_subpath(inner.edges(), outer.edges());
}

struct Query {
  NodeId source{};
  NodeId destination{};
  Time budget = 0;
};

void validate_query(const Network& net, const Query& q);

}  // namespace spotar
