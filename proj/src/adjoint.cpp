#include "nltraffic/adjoint.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nltraffic/errors.hpp"

namespace nltraffic {

double CostBreakdown::mean_velocity() const {
  if (!(total_mass > 0.0)) throw RangeError("mean velocity: the total mass M is zero");
  return -velocity_term / total_mass;
}

std::vector<double> feedback_weights(const Grid& grid, const FeedbackRegion& region) {
  std::vector<double> f(grid.total_cells(), 0.0);
  for (const auto& seg : region.segments) {
    const EdgeGrid& g = grid.edge(seg.edge);
    for (std::size_t i = 0; i < g.n_cells; ++i) {
      const double overlap = std::min(seg.end, g.face(i + 1)) - std::max(seg.begin, g.face(i));
      if (overlap > 0.0) f[g.offset + i] += region.weight * overlap / g.dx;
    }
  }
  return f;
}

namespace {

void require_full_history(const SpaceTimeField& traj, const std::vector<VelocityField>& velocities) {
  const std::size_t steps = traj.steps();
  if (traj.snapshots.size() != steps + 1 || velocities.size() != steps)
    throw SolverError("the adjoint and the cost need the full forward history: rerun with record stride 1");
}

double weighted_sum(const Grid& grid, std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (const auto& g : grid.edges()) {
    double e = 0.0;
    for (std::size_t i = 0; i < g.n_cells; ++i) e += a[g.offset + i] * b[g.offset + i];
    acc += e * g.dx;
  }
  return acc;
}

void require_merges(const Network& net) {
  for (VertexId v : net.junctions()) {
    const auto outs = net.outgoing(v).size();
    if (outs != 1)
      throw UnsupportedError("adjoint: junction '" + net.vertex_name(v) + "' has " + std::to_string(outs) +
                             " outgoing edges; only merge junctions are supported by the optimizer");
  }
}

std::size_t step_containing(const std::vector<double>& times, double t) {
  auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto idx = static_cast<std::size_t>(it - times.begin());
  return std::min(idx == 0 ? 0 : idx - 1, times.size() - 2);
}

}  // namespace

CostBreakdown evaluate_cost(const Grid& grid, const SpaceTimeField& traj, const std::vector<VelocityField>& velocities,
                            const std::vector<double>* feedback) {
  require_full_history(traj, velocities);
  CostBreakdown c;
  for (std::size_t n = 0; n < traj.steps(); ++n) {
    const double dt = traj.dt(n);
    const auto& m = traj.snapshots[n].values;
    c.velocity_term -= weighted_sum(grid, velocities[n].cells, m) * dt;
    c.total_mass += traj.snapshots[n].mass(grid) * dt;
    if (feedback) c.feedback_term += weighted_sum(grid, *feedback, m) * dt;
  }
  c.total = c.velocity_term + c.feedback_term;
  return c;
}

CostBreakdown evaluate_cost(const Scenario& scn, const ForwardResult& fwd) {
  if (!scn.feedback) return evaluate_cost(fwd.grid, fwd.trajectory, fwd.velocities);
  const auto f = feedback_weights(fwd.grid, *scn.feedback);
  return evaluate_cost(fwd.grid, fwd.trajectory, fwd.velocities, &f);
}

DensityField AdjointField::at(double t) const {
  SpaceTimeField view;
  view.times = times;
  view.snapshots = values;
  return interpolate_in_time(view, t);
}

std::vector<double> adjoint_ghosts(const Scenario& scn, const Grid& grid, const DensityField& lambda,
                                   const VelocityField& v, const AdjointOptions& opt) {
  const Network& net = scn.network;
  std::vector<double> ghosts(grid.edges().size(), 0.0);
  for (const auto& g : grid.edges()) {
    const VertexId head = net.edge(g.edge).head;
    if (net.classify(head) == VertexClass::sink) continue;
    const auto& outs = net.outgoing(head);
    if (outs.size() != 1)
      throw UnsupportedError("adjoint: junction '" + net.vertex_name(head) + "' is not a merge");
    const EdgeGrid& o = grid.edge(outs.front());
    const double downstream = lambda.values[o.offset];
    const double last = lambda.values[g.offset + g.n_cells - 1];
    if (opt.junction == JunctionCondition::flux_continuity) {
      ghosts[g.edge] = downstream;
    } else {
      const double v_in = v.outlet(g);
      ghosts[g.edge] = v_in > opt.speed_guard ? downstream * v.face(o, 0) / v_in : last;
    }
  }
  return ghosts;
}

std::vector<double> nonlocal_adjoint_terms(const InteractionOperator& op, const Grid& grid, const DensityField& m,
                                           const DensityField& lambda, const std::vector<double>& ghosts,
                                           const std::vector<std::uint8_t>* mask,
                                           const std::vector<std::uint8_t>* outlet_mask) {
  if (m.values.size() != grid.total_cells() || lambda.values.size() != grid.total_cells())
    throw ShapeError("nonlocal adjoint terms: fields do not match the grid");
  if (op.empty()) return std::vector<double>(grid.total_cells(), 0.0);
  std::vector<double> weight = m.values;
  std::vector<double> outlet(grid.edges().size(), 0.0);
  for (const auto& g : grid.edges()) {
    const double* mc = m.values.data() + g.offset;
    const double* lc = lambda.values.data() + g.offset;
    double* w = weight.data() + g.offset;
    for (std::size_t i = 0; i + 1 < g.n_cells; ++i) {
      const double face = 0.5 * mc[i] * (lc[i + 1] - lc[i]) / g.dx;
      w[i] += face;
      w[i + 1] += face;
    }
    if (!outlet_mask || !(*outlet_mask)[g.edge])
      outlet[g.edge] = mc[g.n_cells - 1] * (ghosts[g.edge] - lc[g.n_cells - 1]);
  }
  return op.apply_reversed(weight, outlet, mask);
}

namespace {

std::vector<std::uint8_t> outlet_clamps(const Grid& grid, const VelocityField& v) {
  std::vector<std::uint8_t> out(grid.edges().size(), 0);
  for (const auto& g : grid.edges()) out[g.edge] = v.outlet(g) <= 0.0;
  return out;
}

}  // namespace

AdjointField solve_adjoint(const ForwardSolver& solver, const ForwardResult& fwd, const AdjointOptions& opt) {
  const Scenario& scn = solver.scenario();
  const Grid& grid = fwd.grid;
  const auto& traj = fwd.trajectory;
  require_full_history(traj, fwd.velocities);
  require_merges(scn.network);

  std::vector<double> f;
  if (scn.feedback) f = feedback_weights(grid, *scn.feedback);
  const auto& op = solver.velocity().interaction();

  AdjointField adj;
  adj.times = traj.times;
  const std::size_t steps = traj.steps();
  adj.values.assign(steps + 1, DensityField::zeros(grid));

  for (std::size_t n = steps; n-- > 0;) {
    const double dt = traj.dt(n);
    const auto& v = fwd.velocities[n];
    const auto& m = traj.snapshots[n];
    const auto& next = adj.values[n + 1];
    auto& cur = adj.values[n];
    const auto ghosts = adjoint_ghosts(scn, grid, next, v, opt);

    std::vector<double> nonlocal;
    if (!op.empty()) {
      std::vector<std::uint8_t> outlet_mask;
      if (opt.clamp_aware) outlet_mask = outlet_clamps(grid, v);
      nonlocal = nonlocal_adjoint_terms(op, grid, m, next, ghosts, opt.clamp_aware ? &v.clamped : nullptr,
                                        opt.clamp_aware ? &outlet_mask : nullptr);
    }

    for (const auto& g : grid.edges()) {
      for (std::size_t i = 0; i < g.n_cells; ++i) {
        const std::size_t c = g.offset + i;
        const double down = i + 1 < g.n_cells ? next.values[c + 1] : ghosts[g.edge];
        double rate = v.face(g, i + 1) * (down - next.values[c]) / g.dx + v.cells[c];
        if (!f.empty()) rate -= f[c];
        if (!nonlocal.empty()) rate -= nonlocal[c];
        const double value = next.values[c] + dt * rate;
        if (!std::isfinite(value)) {
          std::ostringstream msg;
          msg << "non-finite adjoint at t = " << traj.times[n] << " on edge '" << scn.network.edge(g.edge).name
              << "', cell " << i;
          throw SolverError(msg.str());
        }
        cur.values[c] = value;
      }
    }
  }
  return adj;
}

std::vector<double> light_sensitivity(const ForwardSolver& solver, const ForwardResult& fwd, const AdjointField& adj,
                                      double t, std::size_t group, const AdjointOptions& opt) {
  const Scenario& scn = solver.scenario();
  if (group >= solver.velocity().ramps().size()) throw ValidationError("gradient: no light group " + std::to_string(group));
  require_merges(scn.network);
  const Grid& grid = fwd.grid;
  const std::size_t step = step_containing(fwd.trajectory.times, t);
  const bool paired = opt.evaluation == SwitchEvaluation::step_pairing;
  if (paired) require_full_history(fwd.trajectory, fwd.velocities);
  const DensityField m = paired ? fwd.trajectory.snapshots.at(step) : interpolate_in_time(fwd.trajectory, t);
  const DensityField lambda = paired ? adj.values.at(step + 1) : adj.at(t);
  const VelocityField* v = nullptr;
  if (opt.clamp_aware) v = &fwd.velocities.at(step);

  std::vector<double> out;
  for (const auto& ramp : solver.velocity().ramps()[group]) {
    const EdgeGrid& g = grid.edge(ramp.edge);
    const EdgeGrid& o = grid.edge(scn.network.outgoing(scn.network.edge(ramp.edge).head).front());
    const double* mc = m.values.data() + g.offset;
    const double* lc = lambda.values.data() + g.offset;
    auto h = [&](std::size_t i) { return v && v->clamped[g.offset + i] ? 0.0 : ramp.cells[i]; };
    double acc = 0.0;
    for (std::size_t i = 0; i < g.n_cells; ++i) acc += h(i) * mc[i] * g.dx;
    for (std::size_t i = 0; i + 1 < g.n_cells; ++i) acc += 0.5 * (h(i) + h(i + 1)) * mc[i] * (lc[i + 1] - lc[i]);
    const double h_end = v && v->outlet(g) <= 0.0 ? 0.0 : ramp.faces.back();
    acc += h_end * mc[g.n_cells - 1] * (lambda.values[o.offset] - lc[g.n_cells - 1]);
    out.push_back(acc);
  }
  return out;
}

DurationGradient duration_gradient(const ForwardSolver& solver, const ForwardResult& fwd, const AdjointField& adj,
                                   const SwitchSchedule& sched, std::size_t group, const AdjointOptions& opt) {
  const Scenario& scn = solver.scenario();
  if (group >= scn.lights.size()) throw ValidationError("gradient: no light group " + std::to_string(group));
  const double horizon = scn.horizon;
  const auto& light = scn.lights[group];
  const auto phases = phase_signals(sched, light.edges.size(), horizon);

  DurationGradient out;
  out.switch_times = sched.switch_times(horizon);
  const std::size_t n_sw = out.switch_times.size();
  const auto& ramps = solver.velocity().ramps()[group];

  std::size_t stray_clamps = 0;
  for (std::size_t i = 0; i < n_sw; ++i) {
    const double tau = out.switch_times[i];
    auto rate = [&](double t) {
      const auto g = light_sensitivity(solver, fwd, adj, t, group, opt);
      double d = 0.0;
      for (std::size_t k = 0; k < phases.size(); ++k)
        d += static_cast<double>(phases[k].values()[i] - phases[k].values()[i + 1]) * g[k];
      return d;
    };
    out.switches.push_back(rate(tau));

    const auto& v = fwd.velocities.at(step_containing(fwd.trajectory.times, tau));
    if (!v.clamp_active) continue;
    std::vector<std::uint8_t> near(fwd.grid.total_cells(), 0);
    for (const auto& r : ramps) {
      const EdgeGrid& eg = fwd.grid.edge(r.edge);
      for (std::size_t c = 0; c < eg.n_cells; ++c) near[eg.offset + c] = r.cells[c] > 0.0;
    }
    for (std::size_t c = 0; c < near.size(); ++c)
      if (v.clamped[c] && !near[c]) ++stray_clamps;
  }

  out.durations.assign(sched.durations.size(), 0.0);
  double tail = 0.0;
  for (std::size_t i = n_sw; i-- > 0;) {
    tail += out.switches[i];
    out.durations[i] = tail;
  }
  if (sched.durations.size() > n_sw + 1) {
    std::ostringstream msg;
    msg << (sched.durations.size() - n_sw - 1) << " switching instant(s) fall at or beyond T = " << horizon
        << "; their durations are inert";
    out.warnings.push_back(msg.str());
  }
  if (stray_clamps > 0) {
    std::ostringstream msg;
    msg << "speed clamp active away from the light at " << stray_clamps
        << " cell/switch pairs; the gradient ignores the clamp there";
    out.warnings.push_back(msg.str());
  }
  return out;
}

Evaluation evaluate_schedule(const ForwardSolver& solver, const SwitchSchedule& sched, bool with_gradient,
                             const AdjointOptions& opt) {
  const ForwardResult fwd = solver.run(sched);
  Evaluation ev;
  ev.cost = evaluate_cost(solver.scenario(), fwd);
  ev.clamp_steps = fwd.clamp_steps;
  if (with_gradient) {
    const AdjointField adj = solve_adjoint(solver, fwd, opt);
    ev.gradient = duration_gradient(solver, fwd, adj, sched, 0, opt);
  }
  return ev;
}

}  // namespace nltraffic
