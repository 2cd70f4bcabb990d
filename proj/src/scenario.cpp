#include "nltraffic/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nltraffic/errors.hpp"

namespace nltraffic {

namespace {

constexpr double kRowSumTolerance = 1e-12;

std::string edge_label(const Network& net, EdgeId e) { return "'" + net.edge(e).name + "'"; }

void check_row(const Network& net, EdgeId from, const DistributionRow& row, const std::string& where) {
  const Edge& e = net.edge(from);
  const auto& outs = net.outgoing(e.head);
  double sum = 0.0;
  for (const auto& [to, p] : row) {
    if (std::find(outs.begin(), outs.end(), to) == outs.end())
      throw ValidationError(where + ": edge " + edge_label(net, to) + " does not leave the head of " +
                            edge_label(net, from));
    if (!(p >= 0.0 && p <= 1.0))
      throw ValidationError(where + ": entry for " + edge_label(net, from) + " -> " +
                            edge_label(net, to) + " outside [0, 1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > kRowSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << where << ": row of " << edge_label(net, from) << " sums to " << sum << ", expected 1";
    throw ValidationError(msg.str());
  }
}

void check_distribution(const Network& net, const DistributionSchedule& sched, double horizon,
                        const std::string& where) {
  for (std::size_t i = 0; i < sched.breakpoints.size(); ++i) {
    const double b = sched.breakpoints[i];
    if (!(b > 0.0 && b < horizon)) throw ValidationError(where + ": breakpoint outside (0, T)");
    if (i > 0 && !(b > sched.breakpoints[i - 1]))
      throw ValidationError(where + ": breakpoints must increase");
  }
  if (sched.pieces.size() != sched.breakpoints.size() + 1)
    throw ValidationError(where + ": expected one matrix per interval");
  for (const auto& piece : sched.pieces) {
    if (piece.size() != net.edge_count())
      throw ValidationError(where + ": matrix has wrong number of rows");
    for (EdgeId k = 0; k < net.edge_count(); ++k) {
      const bool at_junction = net.classify(net.edge(k).head) == VertexClass::junction;
      if (at_junction)
        check_row(net, k, piece[k], where);
      else if (!piece[k].empty())
        throw ValidationError(where + ": edge " + edge_label(net, k) + " ends at a sink, row must be empty");
    }
  }
}

void check_blocks(const Network& net, const InitialDensity& init, const std::string& where) {
  for (const auto& [e, blocks] : init.blocks) {
    const Edge& edge = net.edge(e);
    for (const auto& b : blocks) {
      if (!(b.begin >= 0.0 && b.end <= edge.length && b.begin < b.end))
        throw ValidationError(where + ": block [" + std::to_string(b.begin) + ", " +
                              std::to_string(b.end) + "] outside edge " + edge_label(net, e));
      if (!(b.height >= 0.0)) throw ValidationError(where + ": negative density on " + edge_label(net, e));
    }
  }
  for (const auto& [e, table] : init.tables) {
    net.edge(e);
    for (double v : table)
      if (!(v >= 0.0)) throw ValidationError(where + ": negative density in table of " + edge_label(net, e));
  }
}

void check_kernel(const Network& net, const KernelParams& k, const std::string& where) {
  if (!k.active()) return;
  if (k.kind == KernelKind::cucker_smale) {
    if (!(k.mu1 > 0.0)) throw ValidationError(where + ": mu1 must be positive");
    if (!(k.mu2 >= 0.0)) throw ValidationError(where + ": mu2 must be non-negative");
    if (!(k.beta >= 0.0)) throw ValidationError(where + ": beta must be non-negative");
  } else {
    if (k.table.x.empty()) throw ValidationError(where + ": tabulated kernel needs values");
    for (double v : k.table.y)
      if (!(v >= 0.0)) throw ValidationError(where + ": tabulated kernel must be non-negative");
  }
  if (!(k.radius > 0.0)) throw ValidationError(where + ": interaction radius must be positive");
  if (k.radius >= net.min_edge_length())
    throw ConstraintError(where + ": interaction radius " + std::to_string(k.radius) +
                          " must be smaller than the minimal edge length " +
                          std::to_string(net.min_edge_length()));
  for (const auto& [from, row] : k.alpha) check_row(net, from, row, where + " alpha");
}

}  // namespace

double PiecewiseLinear::operator()(double at) const {
  if (x.empty()) return 0.0;
  if (at <= x.front()) return y.front();
  if (at >= x.back()) return y.back();
  auto it = std::upper_bound(x.begin(), x.end(), at);
  const std::size_t i = static_cast<std::size_t>(it - x.begin());
  const double w = (at - x[i - 1]) / (x[i] - x[i - 1]);
  return (1.0 - w) * y[i - 1] + w * y[i];
}

double PiecewiseLinear::max() const { return y.empty() ? 0.0 : *std::max_element(y.begin(), y.end()); }
double PiecewiseLinear::min() const { return y.empty() ? 0.0 : *std::min_element(y.begin(), y.end()); }

std::size_t DistributionSchedule::piece_at(double t) const {
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
  return static_cast<std::size_t>(it - breakpoints.begin());
}

DistributionRow distribution_row(const DistributionSchedule& sched, EdgeId edge, double t) {
  if (!(t >= 0.0 && t <= sched.horizon))
    throw RangeError("distribution row: time " + std::to_string(t) + " outside [0, " +
                     std::to_string(sched.horizon) + "]");
  const auto& piece = sched.pieces.at(sched.piece_at(t));
  if (edge >= piece.size()) throw ValidationError("distribution row: unknown edge");
  return piece[edge];
}

DistributionSchedule uniform_distribution(const Network& net, double horizon) {
  DistributionSchedule sched;
  sched.horizon = horizon;
  std::vector<DistributionRow> rows(net.edge_count());
  for (const auto& e : net.edges()) {
    const auto& outs = net.outgoing(e.head);
    for (EdgeId j : outs) rows[e.id][j] = 1.0 / static_cast<double>(outs.size());
  }
  sched.pieces.push_back(std::move(rows));
  return sched;
}

double InflowSchedule::average_rate(VertexId v, double t0, double t1) const {
  for (const auto& s : sources) {
    if (s.vertex != v) continue;
    auto rate_piece = [&](std::size_t i) { return s.rates[i]; };
    if (!(t1 > t0)) {
      auto it = std::upper_bound(s.times.begin(), s.times.end(), t0);
      return rate_piece(static_cast<std::size_t>(it - s.times.begin()) - 1);
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      const double a = std::max(t0, s.times[i]);
      const double b = std::min(t1, i + 1 < s.times.size() ? s.times[i + 1] : t1);
      if (b > a) acc += s.rates[i] * (b - a);
    }
    return acc / (t1 - t0);
  }
  return 0.0;
}

bool InflowSchedule::empty() const {
  for (const auto& s : sources)
    for (double r : s.rates)
      if (r != 0.0) return false;
  return true;
}

double KernelParams::operator()(double r) const {
  switch (kind) {
    case KernelKind::none:
      return 0.0;
    case KernelKind::cucker_smale:
      return mu2 / std::pow(mu1 + r, beta);
    case KernelKind::tabulated:
      return table(r);
  }
  return 0.0;
}

PiecewiseLinear Scenario::free_flow_on(EdgeId e) const {
  auto it = free_flow.find(e);
  if (it != free_flow.end()) return it->second;
  return PiecewiseLinear::constant(default_free_flow);
}

double Scenario::max_free_flow() const {
  double v = 0.0;
  for (const auto& e : network.edges()) v = std::max(v, free_flow_on(e.id).max());
  return v;
}

void validate(const Scenario& scn) {
  const Network& net = scn.network;
  if (!(scn.horizon > 0.0)) throw ValidationError("[grid] T must be positive");
  const GridSpec& g = scn.grid;
  if (!(g.dx > 0.0) && g.cells_per_edge < 2)
    throw ValidationError("[grid] need dx > 0 or cells >= 2");
  if (!(g.cfl > 0.0 && g.cfl <= 1.0)) throw ValidationError("[grid] cfl must lie in (0, 1]");
  if (g.record_stride < 1) throw ValidationError("[grid] stride must be >= 1");

  if (!(scn.default_free_flow >= 0.0)) throw ValidationError("[velocity] vf must be non-negative");
  for (const auto& [e, profile] : scn.free_flow) {
    net.edge(e);
    if (profile.x.empty() || profile.x.size() != profile.y.size())
      throw ValidationError("[velocity] malformed profile on " + edge_label(net, e));
    if (profile.min() < 0.0)
      throw ValidationError("[velocity] negative free-flow speed on " + edge_label(net, e));
    for (std::size_t i = 1; i < profile.x.size(); ++i)
      if (!(profile.x[i] > profile.x[i - 1]))
        throw ValidationError("[velocity] profile knots must increase on " + edge_label(net, e));
  }
  if (!(scn.max_free_flow() > 0.0)) throw ValidationError("[velocity] free-flow speed is zero everywhere");

  check_kernel(net, scn.kernel, "[kernel]");

  std::set<EdgeId> lighted;
  for (const auto& light : scn.lights) {
    if (light.junction >= net.vertex_count()) throw ValidationError("[lights] unknown junction");
    if (light.edges.empty()) throw ValidationError("[lights] no lighted edges");
    for (EdgeId e : light.edges) {
      if (net.edge(e).head != light.junction)
        throw ValidationError("[lights] edge " + edge_label(net, e) + " does not end at junction '" +
                              net.vertex_name(light.junction) + "'");
      if (!lighted.insert(e).second)
        throw ValidationError("[lights] edge " + edge_label(net, e) + " carries more than one light");
    }
    if (!(light.radius > 0.0)) throw ValidationError("[lights] radius must be positive");
    if (light.radius > net.min_edge_length())
      throw ConstraintError("[lights] radius exceeds the minimal edge length");
    if (light.schedule) {
      const auto& s = *light.schedule;
      if (s.u0 < 0 || s.u0 >= static_cast<int>(std::max<std::size_t>(light.edges.size(), 2)))
        throw ValidationError("[lights] u0 out of range");
      for (double d : s.durations)
        if (!(d > 0.0)) throw ValidationError("[lights] durations must be positive");
      if (s.t_green != 0.0 || s.t_red != 0.0)
        if (!(s.t_green > 0.0 && s.t_green < s.t_red))
          throw ValidationError("[lights] need 0 < T_G < T_R");
    } else {
      if (light.fixed.size() != light.edges.size())
        throw ValidationError("[lights] need a schedule or one fixed value per lighted edge");
      for (int v : light.fixed)
        if (v != 0 && v != 1) throw ValidationError("[lights] fixed values must be 0 or 1");
    }
  }

  check_blocks(net, scn.initial, "[initial]");
  if (scn.matrix_p.horizon != scn.horizon) throw ValidationError("[matrixP] horizon mismatch");
  check_distribution(net, scn.matrix_p, scn.horizon, "[matrixP]");

  for (const auto& s : scn.inflow.sources) {
    if (s.vertex >= net.vertex_count() || net.classify(s.vertex) != VertexClass::source)
      throw ValidationError("[inflow] vertex is not a source");
    if (s.times.empty() || s.times.size() != s.rates.size() || s.times.front() != 0.0)
      throw ValidationError("[inflow] pieces must start at t = 0");
    for (std::size_t i = 0; i < s.times.size(); ++i) {
      if (i > 0 && !(s.times[i] > s.times[i - 1])) throw ValidationError("[inflow] times must increase");
      if (!(s.rates[i] >= 0.0)) throw ValidationError("[inflow] rates must be non-negative");
    }
  }

  if (scn.fleet) {
    const FleetConfig& f = *scn.fleet;
    check_blocks(net, f.initial, "[fleet]");
    if (f.q.horizon != scn.horizon) throw ValidationError("[fleet] Q horizon mismatch");
    check_distribution(net, f.q, scn.horizon, "[fleet] Q");
    check_kernel(net, f.kernel, "[fleet]");
    if (!(f.lipschitz > 0.0)) throw ValidationError("[fleet] lipschitz bound must be positive");
    if (!(f.control_default >= 0.0 && f.control_default <= 1.0))
      throw ValidationError("[fleet] control must lie in [0, 1]");
  }

  if (scn.feedback)
    for (const auto& s : scn.feedback->segments) {
      const Edge& e = net.edge(s.edge);
      if (!(s.begin >= 0.0 && s.end <= e.length && s.begin <= s.end))
        throw ValidationError("[feedback] segment outside edge " + edge_label(net, s.edge));
    }
}

}  // namespace nltraffic
