#pragma once

#include <string>
#include <vector>

#include "nltraffic/forward.hpp"

namespace nltraffic {

/// J = velocity_term + feedback_term with velocity_term = -int int v m dx dt.
struct CostBreakdown {
  double total = 0.0;
  double velocity_term = 0.0;
  double feedback_term = 0.0;
  double total_mass = 0.0;  // M = int int m dx dt

  /// Normalized mean velocity -velocity_term / M. Throws RangeError when M = 0.
  double mean_velocity() const;
};

/// Per-cell weight f of the feedback integrand: weight times the covered
/// fraction of each cell.
std::vector<double> feedback_weights(const Grid& grid, const FeedbackRegion& region);

/// Rectangle rule over the step nodes t_0..t_{N-1}. `velocities` holds one
/// field per step; `feedback` (optional) one weight per cell.
CostBreakdown evaluate_cost(const Grid& grid, const SpaceTimeField& traj, const std::vector<VelocityField>& velocities,
                            const std::vector<double>* feedback = nullptr);
CostBreakdown evaluate_cost(const Scenario& scn, const ForwardResult& fwd);

enum class JunctionCondition {
  /// lambda^j v^j = lambda^out v^out wherever v^j > guard, interior
  /// extrapolation elsewhere.
  transmission,
  /// lambda^j = sum_k p_jk lambda^k: the dual of the conservative flux split.
  flux_continuity,
};

enum class SwitchEvaluation {
  /// Fields at tau by linear interpolation between the bracketing nodes.
  interpolated,
  /// m^n and lambda^{n+1} of the step [t_n, t_{n+1}) containing tau: the exact
  /// derivative of the discrete cost with step-averaged signals.
  step_pairing,
};

struct AdjointOptions {
  JunctionCondition junction = JunctionCondition::flux_continuity;
  SwitchEvaluation evaluation = SwitchEvaluation::step_pairing;
  double speed_guard = 1e-9;
  /// Drop the sensitivities of clamped cells (where v = max{., 0} sits at 0).
  bool clamp_aware = false;
};

/// Backward solution lambda at every forward time node; lambda at T is zero.
struct AdjointField {
  std::vector<double> times;
  std::vector<DensityField> values;

  DensityField at(double t) const;
};

/// Downstream neighbour value of the last cell of every edge: 0 at sinks,
/// the junction condition otherwise.
std::vector<double> adjoint_ghosts(const Scenario& scn, const Grid& grid, const DensityField& lambda,
                                   const VelocityField& v, const AdjointOptions& opt);

/// Nonlocal corrections nu*m + nu*(m d_x lambda) of one backward step, with
/// (nu*phi)(x) = int K(y, x) phi(y) dy. The slope weight of each face is split
/// between the two cells whose speeds it averages; outlet faces use the
/// endpoint row of the kernel.
std::vector<double> nonlocal_adjoint_terms(const InteractionOperator& op, const Grid& grid, const DensityField& m,
                                           const DensityField& lambda, const std::vector<double>& ghosts,
                                           const std::vector<std::uint8_t>* mask = nullptr,
                                           const std::vector<std::uint8_t>* outlet_mask = nullptr);

/// Time-backward upwind solve of -lambda_t - v lambda_x + nu*(m lambda_x) = v - f - nu*m.
/// Only merge junctions (one outgoing edge) are supported.
AdjointField solve_adjoint(const ForwardSolver& solver, const ForwardResult& fwd, const AdjointOptions& opt = {});

/// dJ/du_e(t) for each lighted edge e of light group `group`:
/// int H (d_x lambda + 1) m dx including the outgoing-edge boundary term.
std::vector<double> light_sensitivity(const ForwardSolver& solver, const ForwardResult& fwd, const AdjointField& adj,
                                      double t, std::size_t group = 0, const AdjointOptions& opt = {});

struct DurationGradient {
  std::vector<double> durations;  // dJ/ds_k, one per duration
  std::vector<double> switches;   // dJ/dtau_i, one per switch inside (0, T)
  std::vector<double> switch_times;
  std::vector<std::string> warnings;
};

/// Chain rule dJ/ds_k = sum_{i >= k} dJ/dtau_i with
/// dJ/dtau_i = sum_e (u_e before tau_i - u_e after tau_i) dJ/du_e(tau_i).
DurationGradient duration_gradient(const ForwardSolver& solver, const ForwardResult& fwd, const AdjointField& adj,
                                   const SwitchSchedule& sched, std::size_t group = 0,
                                   const AdjointOptions& opt = {});

/// Cost of one schedule, with its duration gradient on request.
struct Evaluation {
  CostBreakdown cost;
  DurationGradient gradient;
  std::size_t clamp_steps = 0;
};
Evaluation evaluate_schedule(const ForwardSolver& solver, const SwitchSchedule& sched, bool with_gradient = true,
                             const AdjointOptions& opt = {});

}  // namespace nltraffic
