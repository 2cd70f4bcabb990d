#pragma once

#include <vector>

#include "nltraffic/control.hpp"
#include "nltraffic/fields.hpp"
#include "nltraffic/scenario.hpp"
#include "nltraffic/velocity.hpp"

namespace nltraffic {

struct SolverConfig {
  double cfl = 0.99;
  Limiter limiter = Limiter::superbee;
  /// Keep every k-th snapshot. The adjoint needs the full history (k = 1).
  int record_stride = 1;

  static SolverConfig from(const Scenario& scn);
  void check() const;
};

/// Upwind stencil around face i+1/2 for v >= 0: cells i-1, i, i+1 (and i+2,
/// unused for nonnegative speeds). A missing far cell means a boundary face,
/// where the flux falls back to first order.
struct FluxStencil {
  double far_upwind = 0.0;
  double upwind = 0.0;
  double downwind = 0.0;
  bool has_far = true;
};

double limiter_phi(Limiter limiter, double theta);

/// F = v (m_up + phi(theta) (1 - v dt/dx) (m_down - m_up) / 2).
double limited_flux(const FluxStencil& s, double v_face, double dx, double dt, Limiter limiter);

/// Light signals of every light group: one step signal per lighted edge.
struct LightControl {
  std::vector<std::vector<StepSignal>> groups;

  /// Schedules and fixed values as written in the scenario.
  static LightControl from_scenario(const Scenario& scn);
  /// Same, with the schedule of light group `group` replaced.
  static LightControl with_schedule(const Scenario& scn, const SwitchSchedule& sched, std::size_t group = 0);

  /// Mean signal of each lighted edge over [t0, t1].
  LightSignals average(double t0, double t1) const;
};

/// Boundary fluxes of one step, per edge, plus global diagnostics.
struct StepFluxes {
  std::vector<double> outflow;
  std::vector<double> inflow;
  double sink_outflow = 0.0;   // mass per unit time leaving the network
  double source_inflow = 0.0;  // mass per unit time entering the network
  double clipped = 0.0;        // mass added by clipping negative cells
};

/// Time nodes t_n = n T / N with N = ceil(T max v_f / (cfl min dx)).
std::vector<double> time_nodes(double horizon, double max_speed, double min_dx, double cfl);

/// One explicit conservative step of size dt starting at time t. Junction
/// influx of e_j is sum_k p_kj(t) times the outflux of e_k; sources split
/// their inflow evenly over their outgoing edges; sinks absorb freely.
DensityField advance_step(const Network& net, const Grid& grid, const DensityField& m, const VelocityField& v,
                          const DistributionSchedule& p, const InflowSchedule& inflow, double t, double dt,
                          const SolverConfig& cfg, StepFluxes* fluxes = nullptr);

struct MassBalance {
  double initial = 0.0;
  double final = 0.0;
  double inflow = 0.0;
  double outflow = 0.0;
  double clipped = 0.0;

  /// |final + outflow - initial - inflow - clipped| relative to the mass scale.
  double relative_residual() const;
};

struct ForwardResult {
  Grid grid;
  SpaceTimeField trajectory;
  std::vector<VelocityField> velocities;  // one per step, full history only
  MassBalance balance;
  std::size_t clamp_steps = 0;  // steps with an active clamp
};

/// Per-step callbacks of ForwardSolver::run. `slowdown` supplies an extra
/// speed reduction for step n (nullptr for none); `advanced` sees the velocity
/// used for the step.
class StepHook {
 public:
  virtual ~StepHook() = default;
  virtual const PointValues* slowdown(std::size_t n, double t, double dt, const DensityField& m) = 0;
  virtual void advanced(std::size_t n, double t, double dt, const VelocityField& v) = 0;
};

/// Reusable forward solver: grid, time nodes and velocity operators are built
/// once per scenario.
class ForwardSolver {
 public:
  explicit ForwardSolver(const Scenario& scn);
  ForwardSolver(Scenario scn, SolverConfig cfg);

  /// `slowdown` is an optional static extra term subtracted from the speed.
  ForwardResult run(const LightControl& control, const PointValues* slowdown = nullptr) const;
  ForwardResult run(const LightControl& control, StepHook& hook) const;
  ForwardResult run(const SwitchSchedule& sched) const;
  ForwardResult run() const;

  const Scenario& scenario() const { return scn_; }
  const SolverConfig& config() const { return cfg_; }
  const Grid& grid() const { return grid_; }
  const std::vector<double>& times() const { return times_; }
  const VelocityModel& velocity() const { return model_; }
  DensityField initial_state() const { return discretize_density(scn_.initial, grid_); }

 private:
  Scenario scn_;
  SolverConfig cfg_;
  Grid grid_;
  std::vector<double> times_;
  VelocityModel model_;
};

ForwardResult simulate_forward(const Scenario& scn, const LightControl& control, const SolverConfig& cfg);

}  // namespace nltraffic
