#include "nltraffic/network.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <unordered_map>

#include "nltraffic/errors.hpp"

namespace nltraffic {

Network Network::build(std::span<const EdgeSpec> specs) {
  if (specs.empty()) throw ValidationError("network: edge list is empty");

  Network net;
  std::unordered_map<std::string, VertexId> vertex_index;
  std::unordered_map<std::string, EdgeId> edge_index;
  auto vertex = [&](const std::string& name) {
    auto [it, inserted] = vertex_index.emplace(name, net.vertex_names_.size());
    if (inserted) net.vertex_names_.push_back(name);
    return it->second;
  };

  for (const auto& spec : specs) {
    const std::string label = "edge '" + spec.name + "'";
    if (spec.name.empty()) throw ValidationError("network: edge with empty name");
    if (!edge_index.emplace(spec.name, net.edges_.size()).second)
      throw ValidationError("network: duplicate " + label);
    if (spec.tail == spec.head)
      throw ValidationError("network: " + label + " is a self-loop at '" + spec.tail + "'");
    if (!(spec.length > 0.0) || !std::isfinite(spec.length))
      throw ValidationError("network: " + label + " has non-positive length");
    Edge e;
    e.id = net.edges_.size();
    e.name = spec.name;
    e.tail = vertex(spec.tail);
    e.head = vertex(spec.head);
    e.length = spec.length;
    e.terminal = spec.terminal;
    net.edges_.push_back(std::move(e));
  }

  const std::size_t nv = net.vertex_names_.size();
  net.inc_.assign(nv, {});
  net.out_.assign(nv, {});
  net.min_length_ = std::numeric_limits<double>::infinity();
  for (const auto& e : net.edges_) {
    net.out_[e.tail].push_back(e.id);
    net.inc_[e.head].push_back(e.id);
    net.min_length_ = std::min(net.min_length_, e.length);
  }
  net.classes_.resize(nv);
  for (VertexId v = 0; v < nv; ++v) {
    if (net.inc_[v].empty()) {
      net.classes_[v] = VertexClass::source;
      net.sources_.push_back(v);
    } else if (net.out_[v].empty()) {
      net.classes_[v] = VertexClass::sink;
      net.sinks_.push_back(v);
    } else {
      net.classes_[v] = VertexClass::junction;
      net.junctions_.push_back(v);
    }
  }
  return net;
}

Network build_network(std::span<const EdgeSpec> edges) { return Network::build(edges); }

const Edge& Network::edge(EdgeId id) const {
  if (id >= edges_.size()) throw ValidationError("network: unknown edge id " + std::to_string(id));
  return edges_[id];
}

const std::string& Network::vertex_name(VertexId v) const {
  if (v >= vertex_names_.size())
    throw ValidationError("network: unknown vertex id " + std::to_string(v));
  return vertex_names_[v];
}

std::optional<EdgeId> Network::find_edge(std::string_view name) const {
  for (const auto& e : edges_)
    if (e.name == name) return e.id;
  return std::nullopt;
}

std::optional<VertexId> Network::find_vertex(std::string_view name) const {
  for (VertexId v = 0; v < vertex_names_.size(); ++v)
    if (vertex_names_[v] == name) return v;
  return std::nullopt;
}

EdgeId Network::edge_id(std::string_view name) const {
  if (auto id = find_edge(name)) return *id;
  throw ValidationError("network: unknown edge '" + std::string(name) + "'");
}

VertexId Network::vertex_id(std::string_view name) const {
  if (auto id = find_vertex(name)) return *id;
  throw ValidationError("network: unknown vertex '" + std::string(name) + "'");
}

void Network::check_point(const EdgePoint& p) const {
  const Edge& e = edge(p.edge);
  if (!(p.offset >= 0.0 && p.offset <= e.length))
    throw ValidationError("network: offset " + std::to_string(p.offset) + " outside edge '" +
                          e.name + "'");
}

std::vector<EdgeSpec> Network::specs() const {
  std::vector<EdgeSpec> out;
  out.reserve(edges_.size());
  for (const auto& e : edges_)
    out.push_back({e.name, vertex_names_[e.tail], vertex_names_[e.head], e.length, e.terminal});
  return out;
}

std::optional<double> path_distance(const Network& net, const EdgePoint& x, const EdgePoint& y) {
  net.check_point(x);
  net.check_point(y);
  if (x.edge == y.edge && y.offset >= x.offset) return y.offset - x.offset;

  // Dijkstra over vertices starting at the head of x's edge.
  const Edge& ex = net.edge(x.edge);
  const Edge& ey = net.edge(y.edge);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(net.vertex_count(), inf);
  using Item = std::pair<double, VertexId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[ex.head] = ex.length - x.offset;
  queue.emplace(dist[ex.head], ex.head);
  while (!queue.empty()) {
    auto [d, v] = queue.top();
    queue.pop();
    if (d > dist[v]) continue;
    for (EdgeId eid : net.outgoing(v)) {
      const Edge& e = net.edge(eid);
      const double nd = d + e.length;
      if (nd < dist[e.head]) {
        dist[e.head] = nd;
        queue.emplace(nd, e.head);
      }
    }
  }
  if (!std::isfinite(dist[ey.tail])) return std::nullopt;
  return dist[ey.tail] + y.offset;
}

std::vector<Segment> visual_field(const Network& net, const EdgePoint& x, double radius) {
  net.check_point(x);
  if (!(radius > 0.0)) throw ConstraintError("visual field: radius must be positive");
  if (radius >= net.min_edge_length())
    throw ConstraintError("visual field: radius " + std::to_string(radius) +
                          " must be smaller than the minimal edge length " +
                          std::to_string(net.min_edge_length()));
  const Edge& e = net.edge(x.edge);
  std::vector<Segment> field;
  const double end = std::min(e.length, x.offset + radius);
  if (end > x.offset) field.push_back({e.id, x.offset, end});
  const double spill = radius - (e.length - x.offset);
  if (spill > 0.0)
    for (EdgeId next : net.outgoing(e.head)) field.push_back({next, 0.0, spill});
  return field;
}

}  // namespace nltraffic
