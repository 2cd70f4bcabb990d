#pragma once

#include <string>
#include <vector>

namespace nltraffic {

/// Traffic-light schedule encoded by its initial state and the durations
/// between consecutive switches. u0 = 1 means red on the first lighted edge.
struct SwitchSchedule {
  int u0 = 0;
  std::vector<double> durations;
  double t_green = 0.0;  // lower box bound T_G
  double t_red = 0.0;    // upper box bound T_R

  /// Cumulative sums tau_1..tau_S. Only tau_1..tau_{S-1} are switching instants;
  /// tau_S closes the last interval.
  std::vector<double> cumulative_times() const;
  /// Switching instants strictly inside (0, horizon).
  std::vector<double> switch_times(double horizon) const;
  std::size_t switch_count(double horizon) const { return switch_times(horizon).size(); }
};

/// Right-continuous piecewise-constant signal on [0, horizon].
class StepSignal {
 public:
  StepSignal() = default;
  StepSignal(std::vector<double> breaks, std::vector<int> values, double horizon);

  static StepSignal constant(int value, double horizon) { return StepSignal({}, {value}, horizon); }

  int at(double t) const;
  /// Mean value over [t0, t1].
  double average(double t0, double t1) const;

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<int>& values() const { return values_; }
  double horizon() const { return horizon_; }

  StepSignal complement() const;

 private:
  std::vector<double> breaks_;  // strictly increasing, inside (0, horizon)
  std::vector<int> values_;     // breaks_.size() + 1 entries
  double horizon_ = 0.0;
};

/// u^s(t) = sum_i u_i chi_[tau_i, tau_{i+1})(t) with u_i = 1 - u_{i-1}. The last
/// state is held until the horizon.
StepSignal reconstruct_control(const SwitchSchedule& sched, double horizon);

/// Signals of the N lighted edges of one junction. For N = 1 the edge follows
/// u^s; for N >= 2 the green edge of phase i is (u0 + i) mod N, which for two
/// edges gives the pair u^1 = u^s, u^2 = 1 - u^s.
std::vector<StepSignal> phase_signals(const SwitchSchedule& sched, std::size_t n_edges, double horizon);

/// Component-wise projection onto [t_green, t_red].
std::vector<double> project_durations(const std::vector<double>& durations, double t_green,
                                      double t_red);

/// Completes and validates the signals of the incoming edges of a junction.
/// A 2-1 junction given only the first signal gets u^2 = 1 - u^1. Every time
/// must have exactly one green edge (sum_j u_j + 1 = N).
std::vector<StepSignal> junction_signal_complement(const std::vector<StepSignal>& incoming,
                                                   std::size_t n_incoming);

/// Asymmetric phase rule: red phases shorter than t_red, green phases longer
/// than t_green (from the point of view of the first lighted edge). Returns
/// one message per violation; empty when the schedule complies.
std::vector<std::string> asymmetric_phase_violations(const SwitchSchedule& sched, double horizon);

}  // namespace nltraffic
