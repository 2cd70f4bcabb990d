#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nltraffic/adjoint.hpp"

namespace nltraffic {

struct DescentOptions {
  double tolerance = 1e-7;     // stop when |J_{k+1} - J_k| < tolerance
  double beta0 = 1.0;          // first trial step of every line search
  int max_iter = 200;
  int max_halvings = 20;
  double armijo = 1e-4;
  double gradient_floor = 1e-10;  // on the projected gradient
  AdjointOptions adjoint;
};

enum class Termination { tolerance, max_iter, line_search_failure, stationary };

const char* to_string(Termination t);

struct DescentIterate {
  std::size_t iter = 0;
  std::vector<double> durations;
  double cost = 0.0;
  double beta = 0.0;  // accepted step (0 for the start point)
};

struct DescentReport {
  std::vector<DescentIterate> iterates;  // accepted points, starting with s0
  Termination termination = Termination::max_iter;
  SwitchSchedule best;
  double best_cost = 0.0;
  /// max_i |s_i - P(s_i - g_i)| at the best point: zero at a point satisfying
  /// the box-constrained optimality condition.
  double vi_residual = 0.0;
  std::size_t evaluations = 0;  // forward solves
  std::vector<std::string> warnings;
};

/// Projected gradient descent with backtracking line search on the schedule
/// of light group 0. s0 is projected onto the box first.
DescentReport descend(const ForwardSolver& solver, const SwitchSchedule& s0, const DescentOptions& opt = {});

/// max_i |s_i - P(s_i - g_i)| for the box [t_green, t_red].
double variational_residual(const std::vector<double>& durations, const std::vector<double>& gradient, double t_green,
                            double t_red);

struct MultiStartReport {
  std::vector<DescentReport> runs;   // in start order
  std::vector<SwitchSchedule> starts;
  std::size_t best_index = 0;

  const DescentReport& best() const { return runs.at(best_index); }
};

/// Random start points: durations i.i.d. uniform on [t_green, t_red], drawn
/// in start order from one mt19937_64 seeded with `seed`. Runs are spread over
/// `threads` workers (0 = hardware concurrency); the lowest J wins and ties go
/// to the lowest start index.
std::vector<SwitchSchedule> random_starts(const SwitchSchedule& shape, std::size_t n_starts, std::uint64_t seed);
MultiStartReport multi_start(const ForwardSolver& solver, const SwitchSchedule& shape, std::size_t n_starts,
                             std::uint64_t seed, const DescentOptions& opt = {}, unsigned threads = 0);

struct SweepPoint {
  double tau = 0.0;
  double cost = 0.0;
  double mean_velocity = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<std::size_t> argmax;  // samples with the largest mean velocity
};

/// Exhaustive search over single-switch schedules s = (tau, T - tau) with
/// tau_k = k T / (n + 1), k = 1..n. The initial state comes from the scenario
/// schedule (u0 = 1 when the light has none).
SweepResult sweep_single_switch(const ForwardSolver& solver, std::size_t n_samples, unsigned threads = 0);

struct GradcheckRow {
  std::size_t component = 0;  // 1-based duration index
  double analytic = 0.0;
  double finite_diff = 0.0;
  double rel_err = 0.0;  // |analytic - fd| / |fd| (0 when both vanish)
};

/// Adjoint duration gradient against central differences of J with step
/// delta_steps * dt on light group 0.
std::vector<GradcheckRow> gradient_check(const ForwardSolver& solver, const SwitchSchedule& sched,
                                         double delta_steps = 2.0, const AdjointOptions& opt = {});

}  // namespace nltraffic
