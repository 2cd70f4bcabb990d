#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace nltraffic {

using EdgeId = std::size_t;
using VertexId = std::size_t;

/// Input record for one directed road from tail to head. `terminal` marks a
/// truncated stand-in for an unbounded arc.
struct EdgeSpec {
  std::string name;
  std::string tail;
  std::string head;
  double length = 0.0;
  bool terminal = false;
};

struct Edge {
  EdgeId id = 0;
  std::string name;
  VertexId tail = 0;
  VertexId head = 0;
  double length = 0.0;
  bool terminal = false;
};

/// A point on the network in arc-length coordinates along an edge.
struct EdgePoint {
  EdgeId edge = 0;
  double offset = 0.0;
};

/// A closed interval [begin, end] on one edge.
struct Segment {
  EdgeId edge = 0;
  double begin = 0.0;
  double end = 0.0;

  double length() const { return end - begin; }
};

enum class VertexClass { source, junction, sink };

/// Immutable directed road network. Vertex classes and incidence lists are
/// derived from the edge list at construction.
class Network {
 public:
  /// Builds and validates a network. Throws ValidationError naming the
  /// offending edge on duplicate names, self-loops or non-positive lengths.
  static Network build(std::span<const EdgeSpec> edges);

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId id) const;
  std::size_t edge_count() const { return edges_.size(); }
  std::size_t vertex_count() const { return vertex_names_.size(); }

  const std::string& vertex_name(VertexId v) const;
  std::optional<EdgeId> find_edge(std::string_view name) const;
  std::optional<VertexId> find_vertex(std::string_view name) const;
  EdgeId edge_id(std::string_view name) const;      // throws ValidationError
  VertexId vertex_id(std::string_view name) const;  // throws ValidationError

  const std::vector<EdgeId>& incoming(VertexId v) const { return inc_.at(v); }
  const std::vector<EdgeId>& outgoing(VertexId v) const { return out_.at(v); }

  const std::vector<VertexId>& sources() const { return sources_; }
  const std::vector<VertexId>& junctions() const { return junctions_; }
  const std::vector<VertexId>& sinks() const { return sinks_; }
  VertexClass classify(VertexId v) const { return classes_.at(v); }

  /// L_0: the shortest edge length.
  double min_edge_length() const { return min_length_; }

  void check_point(const EdgePoint& p) const;

  /// Rebuild the EdgeSpec list (used by scenario serialization).
  std::vector<EdgeSpec> specs() const;

 private:
  std::vector<Edge> edges_;
  std::vector<std::string> vertex_names_;
  std::vector<std::vector<EdgeId>> inc_;
  std::vector<std::vector<EdgeId>> out_;
  std::vector<VertexClass> classes_;
  std::vector<VertexId> sources_;
  std::vector<VertexId> junctions_;
  std::vector<VertexId> sinks_;
  double min_length_ = 0.0;
};

Network build_network(std::span<const EdgeSpec> edges);

/// Length of the shortest orientation-respecting path from x to y, or
/// std::nullopt when y cannot be reached from x.
std::optional<double> path_distance(const Network& net, const EdgePoint& x, const EdgePoint& y);

/// Downstream region within `radius` of x: the rest of x's edge plus initial
/// segments of every edge leaving the head vertex when the radius spills over.
/// Requires radius < L_0, so at most one vertex is crossed.
std::vector<Segment> visual_field(const Network& net, const EdgePoint& x, double radius);

}  // namespace nltraffic
