#include "nltraffic/forward.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nltraffic/errors.hpp"

namespace nltraffic {

SolverConfig SolverConfig::from(const Scenario& scn) {
  SolverConfig cfg;
  cfg.cfl = scn.grid.cfl;
  cfg.limiter = scn.grid.limiter;
  cfg.record_stride = scn.grid.record_stride;
  return cfg;
}

void SolverConfig::check() const {
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ValidationError("solver: cfl must lie in (0, 1]");
  if (record_stride < 1) throw ValidationError("solver: record stride must be at least 1");
}

double limiter_phi(Limiter limiter, double theta) {
  switch (limiter) {
    case Limiter::superbee:
      return std::max({0.0, std::min(1.0, 2.0 * theta), std::min(2.0, theta)});
    case Limiter::minmod:
      return std::max(0.0, std::min(1.0, theta));
    case Limiter::none:
      return 0.0;
  }
  return 0.0;
}

double limited_flux(const FluxStencil& s, double v_face, double dx, double dt, Limiter limiter) {
  if (v_face <= 0.0) return 0.0;
  const double jump = s.downwind - s.upwind;
  if (!s.has_far || limiter == Limiter::none || jump == 0.0) return v_face * s.upwind;
  const double theta = (s.upwind - s.far_upwind) / jump;
  const double courant = v_face * dt / dx;
  return v_face * (s.upwind + 0.5 * limiter_phi(limiter, theta) * (1.0 - courant) * jump);
}

LightControl LightControl::from_scenario(const Scenario& scn) {
  LightControl c;
  for (const auto& light : scn.lights) {
    if (light.schedule) {
      c.groups.push_back(phase_signals(*light.schedule, light.edges.size(), scn.horizon));
    } else {
      std::vector<StepSignal> fixed;
      for (std::size_t k = 0; k < light.edges.size(); ++k)
        fixed.push_back(StepSignal::constant(k < light.fixed.size() ? light.fixed[k] : 0, scn.horizon));
      c.groups.push_back(std::move(fixed));
    }
  }
  return c;
}

LightControl LightControl::with_schedule(const Scenario& scn, const SwitchSchedule& sched, std::size_t group) {
  if (group >= scn.lights.size()) throw ValidationError("control: scenario has no light group " + std::to_string(group));
  LightControl c = from_scenario(scn);
  c.groups[group] = phase_signals(sched, scn.lights[group].edges.size(), scn.horizon);
  return c;
}

LightSignals LightControl::average(double t0, double t1) const {
  LightSignals out(groups.size());
  for (std::size_t l = 0; l < groups.size(); ++l)
    for (const auto& s : groups[l]) out[l].push_back(s.average(t0, t1));
  return out;
}

std::vector<double> time_nodes(double horizon, double max_speed, double min_dx, double cfl) {
  if (!(horizon > 0.0)) throw ValidationError("solver: horizon must be positive");
  if (!(max_speed > 0.0)) throw ValidationError("solver: the maximal free-flow speed must be positive");
  const double steps_real = horizon * max_speed / (cfl * min_dx);
  const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(steps_real - 1e-9)));
  std::vector<double> t(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) t[n] = horizon * static_cast<double>(n) / static_cast<double>(steps);
  return t;
}

double MassBalance::relative_residual() const {
  const double scale = std::max({initial, final, inflow, outflow, 1e-300});
  return std::abs(final + outflow - initial - inflow - clipped) / scale;
}

DensityField advance_step(const Network& net, const Grid& grid, const DensityField& m, const VelocityField& v,
                          const DistributionSchedule& p, const InflowSchedule& inflow, double t, double dt,
                          const SolverConfig& cfg, StepFluxes* fluxes) {
  if (m.values.size() != grid.total_cells() || v.cells.size() != grid.total_cells())
    throw ShapeError("advance_step: state or velocity does not match the grid");

  const std::size_t n_edges = grid.edges().size();
  std::vector<double> out(n_edges, 0.0);
  std::vector<double> in(n_edges, 0.0);

  for (const auto& g : grid.edges()) {
    const double vmax = *std::max_element(v.faces.begin() + static_cast<long>(g.offset + g.edge),
                                          v.faces.begin() + static_cast<long>(g.offset + g.edge + g.n_cells + 1));
    if (vmax * dt > cfg.cfl * g.dx * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "CFL violated on edge '" << net.edge(g.edge).name << "': v dt / dx = " << vmax * dt / g.dx
          << " > " << cfg.cfl;
      throw CflError(msg.str());
    }
    out[g.edge] = v.outlet(g) * m.values[g.offset + g.n_cells - 1];
  }

  double sink_out = 0.0;
  double source_in = 0.0;
  for (const auto& e : net.edges()) {
    if (net.classify(e.head) == VertexClass::sink) {
      sink_out += out[e.id];
      continue;
    }
    for (const auto& [j, frac] : distribution_row(p, e.id, t)) in[j] += frac * out[e.id];
  }
  for (VertexId s : net.sources()) {
    const auto& outs = net.outgoing(s);
    const double rate = inflow.average_rate(s, t, t + dt);
    source_in += rate;
    for (EdgeId j : outs) in[j] += rate / static_cast<double>(outs.size());
  }

  DensityField next = m;
  double clipped = 0.0;
  for (const auto& g : grid.edges()) {
    const double* cells = m.values.data() + g.offset;
    double* dst = next.values.data() + g.offset;
    const double ratio = dt / g.dx;
    double left = in[g.edge];
    for (std::size_t i = 0; i < g.n_cells; ++i) {
      double right;
      if (i + 1 == g.n_cells) {
        right = out[g.edge];
      } else {
        FluxStencil s{i > 0 ? cells[i - 1] : 0.0, cells[i], cells[i + 1], i > 0};
        right = limited_flux(s, v.face(g, i + 1), g.dx, dt, cfg.limiter);
      }
      double value = cells[i] - ratio * (right - left);
      if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << "non-finite density at t = " << t << " on edge '" << net.edge(g.edge).name << "', cell " << i
            << " (m = " << cells[i] << ", v = " << v.cells[g.offset + i] << ")";
        throw SolverError(msg.str());
      }
      if (value < 0.0) {
        clipped -= value * g.dx;
        value = 0.0;
      }
      dst[i] = value;
      left = right;
    }
  }

  if (fluxes) {
    fluxes->outflow = std::move(out);
    fluxes->inflow = std::move(in);
    fluxes->sink_outflow = sink_out;
    fluxes->source_inflow = source_in;
    fluxes->clipped = clipped;
  }
  return next;
}

ForwardSolver::ForwardSolver(const Scenario& scn) : ForwardSolver(scn, SolverConfig::from(scn)) {}

ForwardSolver::ForwardSolver(Scenario scn, SolverConfig cfg)
    : scn_(std::move(scn)),
      cfg_(cfg),
      grid_(Grid::for_scenario(scn_)),
      times_(time_nodes(scn_.horizon, scn_.max_free_flow(), grid_.min_dx(), cfg.cfl)),
      model_((validate(scn_), scn_), grid_) {
  cfg_.check();
}

namespace {

std::vector<double> head_values(const Grid& grid, const DensityField& m) {
  std::vector<double> h;
  for (const auto& g : grid.edges()) h.push_back(m.values[g.offset + g.n_cells - 1]);
  return h;
}

}  // namespace

namespace {

class StaticSlowdown final : public StepHook {
 public:
  explicit StaticSlowdown(const PointValues* extra) : extra_(extra) {}
  const PointValues* slowdown(std::size_t, double, double, const DensityField&) override { return extra_; }
  void advanced(std::size_t, double, double, const VelocityField&) override {}

 private:
  const PointValues* extra_;
};

}  // namespace

ForwardResult ForwardSolver::run(const LightControl& control, const PointValues* slowdown) const {
  StaticSlowdown hook(slowdown);
  return run(control, hook);
}

ForwardResult ForwardSolver::run(const LightControl& control, StepHook& hook) const {
  cfg_.check();
  ForwardResult r;
  r.grid = grid_;
  auto& traj = r.trajectory;
  const std::size_t steps = times_.size() - 1;
  const bool full = cfg_.record_stride == 1;

  DensityField m = initial_state();
  r.balance.initial = m.mass(grid_);
  traj.times.push_back(times_[0]);
  traj.snapshots.push_back(m);
  traj.head_trace.push_back(head_values(grid_, m));
  traj.outflow.reserve(steps);
  traj.inflow.reserve(steps);
  if (full) r.velocities.reserve(steps);

  for (std::size_t n = 0; n < steps; ++n) {
    const double t = times_[n];
    const double dt = times_[n + 1] - t;
    VelocityField v = model_.evaluate(m, control.average(t, t + dt), hook.slowdown(n, t, dt, m));
    if (v.clamp_active) ++r.clamp_steps;
    hook.advanced(n, t, dt, v);
    StepFluxes fl;
    m = advance_step(scn_.network, grid_, m, v, scn_.matrix_p, scn_.inflow, t, dt, cfg_, &fl);
    r.balance.inflow += fl.source_inflow * dt;
    r.balance.outflow += fl.sink_outflow * dt;
    r.balance.clipped += fl.clipped;
    traj.outflow.push_back(std::move(fl.outflow));
    traj.inflow.push_back(std::move(fl.inflow));
    if (full) r.velocities.push_back(std::move(v));
    if (full || (n + 1) % static_cast<std::size_t>(cfg_.record_stride) == 0 || n + 1 == steps) {
      traj.times.push_back(times_[n + 1]);
      traj.snapshots.push_back(m);
      traj.head_trace.push_back(head_values(grid_, m));
    }
  }
  r.balance.final = m.mass(grid_);
  return r;
}

ForwardResult ForwardSolver::run(const SwitchSchedule& sched) const {
  return run(LightControl::with_schedule(scn_, sched));
}

ForwardResult ForwardSolver::run() const { return run(LightControl::from_scenario(scn_)); }

ForwardResult simulate_forward(const Scenario& scn, const LightControl& control, const SolverConfig& cfg) {
  return ForwardSolver(scn, cfg).run(control);
}

}  // namespace nltraffic
