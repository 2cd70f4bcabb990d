#pragma once

#include "nltraffic/forward.hpp"

namespace nltraffic {

/// Fleet control u(x, t) = clip(ux_e(x) * ut(t), 0, 1) sampled on the grid.
class FleetControl {
 public:
  FleetControl(const Scenario& scn, const Grid& grid);

  /// Values at cell centers and at the n+1 faces of every edge.
  const std::vector<double>& cells(double t) const;
  const std::vector<double>& faces(double t) const;

 private:
  void sample(double t) const;
  std::vector<double> space_cells_;
  std::vector<double> space_faces_;
  PiecewiseLinear time_;
  mutable double cached_t_ = -1.0;
  mutable std::vector<double> cells_;
  mutable std::vector<double> faces_;
};

struct LipschitzReport {
  double space_slope = 0.0;  // max |u(x_{i+1}) - u(x_i)| / dx
  double time_slope = 0.0;   // max |u(t_{n+1}) - u(t_n)| / dt
  double bound = 0.0;
  bool ok = true;  // both slopes within 1.1 * bound
};

/// Discrete Lipschitz check of the fleet control on the grid and time nodes.
LipschitzReport check_fleet_lipschitz(const Scenario& scn, const Grid& grid, const std::vector<double>& times);

struct CoupledResult {
  ForwardResult drivers;
  SpaceTimeField fleet;
  MassBalance fleet_balance;
  LipschitzReport lipschitz;
};

/// Advances the drivers m and the fleet mu with the same explicit steps, both
/// from time-n data: m moves with v[m, mu] and the matrix P, mu moves with
/// u v[m, mu] and the matrix Q and receives no inflow. The fleet slows the
/// drivers through its own interaction kernel applied to mu. Throws
/// ValidationError when the scenario has no fleet block or the control breaks
/// its Lipschitz bound.
CoupledResult simulate_coupled(const ForwardSolver& solver, const LightControl& control);
CoupledResult simulate_coupled(const Scenario& scn);

}  // namespace nltraffic
