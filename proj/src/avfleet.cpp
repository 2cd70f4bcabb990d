#include "nltraffic/avfleet.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nltraffic/errors.hpp"

namespace nltraffic {

namespace {

const FleetConfig& fleet_of(const Scenario& scn) {
  if (!scn.fleet) throw ValidationError("scenario '" + scn.name + "' has no [fleet] block");
  return *scn.fleet;
}

double clip01(double u) { return std::clamp(u, 0.0, 1.0); }

}  // namespace

FleetControl::FleetControl(const Scenario& scn, const Grid& grid) : time_(fleet_of(scn).control_time) {
  const FleetConfig& f = *scn.fleet;
  space_faces_.assign(grid.total_cells() + grid.edges().size(), 0.0);
  space_cells_.assign(grid.total_cells(), 0.0);
  for (const auto& g : grid.edges()) {
    auto it = f.control_space.find(g.edge);
    auto shape = [&](double x) { return it == f.control_space.end() ? f.control_default : it->second(x); };
    for (std::size_t i = 0; i < g.n_cells; ++i) space_cells_[g.offset + i] = shape(g.center(i));
    for (std::size_t i = 0; i <= g.n_cells; ++i) space_faces_[g.offset + g.edge + i] = shape(g.face(i));
  }
}

void FleetControl::sample(double t) const {
  if (t == cached_t_) return;
  const double scale = time_(t);
  cells_.resize(space_cells_.size());
  faces_.resize(space_faces_.size());
  std::transform(space_cells_.begin(), space_cells_.end(), cells_.begin(), [&](double u) { return clip01(u * scale); });
  std::transform(space_faces_.begin(), space_faces_.end(), faces_.begin(), [&](double u) { return clip01(u * scale); });
  cached_t_ = t;
}

const std::vector<double>& FleetControl::cells(double t) const {
  sample(t);
  return cells_;
}

const std::vector<double>& FleetControl::faces(double t) const {
  sample(t);
  return faces_;
}

LipschitzReport check_fleet_lipschitz(const Scenario& scn, const Grid& grid, const std::vector<double>& times) {
  const FleetControl control(scn, grid);
  LipschitzReport rep;
  rep.bound = scn.fleet->lipschitz;
  std::vector<double> previous;
  for (std::size_t n = 0; n < times.size(); ++n) {
    const auto cells = control.cells(times[n]);
    for (const auto& g : grid.edges())
      for (std::size_t i = 0; i + 1 < g.n_cells; ++i)
        rep.space_slope = std::max(rep.space_slope, std::abs(cells[g.offset + i + 1] - cells[g.offset + i]) / g.dx);
    if (n > 0) {
      const double dt = times[n] - times[n - 1];
      for (std::size_t c = 0; c < cells.size(); ++c)
        rep.time_slope = std::max(rep.time_slope, std::abs(cells[c] - previous[c]) / dt);
    }
    previous = cells;
  }
  rep.ok = rep.space_slope <= 1.1 * rep.bound && rep.time_slope <= 1.1 * rep.bound;
  return rep;
}

namespace {

class FleetStepper final : public StepHook {
 public:
  FleetStepper(const ForwardSolver& solver, SpaceTimeField& out, MassBalance& balance)
      : solver_(solver),
        fleet_(*solver.scenario().fleet),
        grid_(solver.grid()),
        control_(solver.scenario(), grid_),
        kernel_(solver.scenario().network, grid_, fleet_.kernel),
        out_(out),
        balance_(balance),
        mu_(discretize_density(fleet_.initial, grid_)) {
    balance_.initial = mu_.mass(grid_);
    out_.times.push_back(solver.times().front());
    out_.snapshots.push_back(mu_);
  }

  const PointValues* slowdown(std::size_t, double, double, const DensityField&) override {
    if (kernel_.empty()) return nullptr;
    slow_ = kernel_.apply(mu_);
    return &slow_;
  }

  void advanced(std::size_t n, double t, double dt, const VelocityField& v) override {
    const auto& uc = control_.cells(t);
    const auto& uf = control_.faces(t);
    VelocityField w;
    w.cells.resize(v.cells.size());
    w.faces.resize(v.faces.size());
    w.clamped = v.clamped;
    for (std::size_t c = 0; c < w.cells.size(); ++c) w.cells[c] = uc[c] * v.cells[c];
    for (std::size_t f = 0; f < w.faces.size(); ++f) w.faces[f] = uf[f] * v.faces[f];

    const Scenario& scn = solver_.scenario();
    StepFluxes fl;
    mu_ = advance_step(scn.network, grid_, mu_, w, fleet_.q, InflowSchedule{}, t, dt, solver_.config(), &fl);
    balance_.outflow += fl.sink_outflow * dt;
    balance_.clipped += fl.clipped;
    out_.outflow.push_back(std::move(fl.outflow));
    out_.inflow.push_back(std::move(fl.inflow));
    out_.times.push_back(solver_.times()[n + 1]);
    out_.snapshots.push_back(mu_);
    balance_.final = mu_.mass(grid_);
  }

 private:
  const ForwardSolver& solver_;
  const FleetConfig& fleet_;
  const Grid& grid_;
  FleetControl control_;
  InteractionOperator kernel_;
  SpaceTimeField& out_;
  MassBalance& balance_;
  DensityField mu_;
  PointValues slow_;
};

}  // namespace

CoupledResult simulate_coupled(const ForwardSolver& solver, const LightControl& control) {
  const Scenario& scn = solver.scenario();
  fleet_of(scn);
  CoupledResult r;
  r.lipschitz = check_fleet_lipschitz(scn, solver.grid(), solver.times());
  if (!r.lipschitz.ok) {
    std::ostringstream msg;
    msg << "fleet control exceeds its Lipschitz bound " << r.lipschitz.bound << " (space slope "
        << r.lipschitz.space_slope << ", time slope " << r.lipschitz.time_slope << ")";
    throw ValidationError(msg.str());
  }
  FleetStepper stepper(solver, r.fleet, r.fleet_balance);
  r.drivers = solver.run(control, stepper);
  return r;
}

CoupledResult simulate_coupled(const Scenario& scn) {
  const ForwardSolver solver(scn);
  return simulate_coupled(solver, LightControl::from_scenario(scn));
}

}  // namespace nltraffic
