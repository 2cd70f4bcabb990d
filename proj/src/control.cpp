#include "nltraffic/control.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "nltraffic/errors.hpp"

namespace nltraffic {

std::vector<double> SwitchSchedule::cumulative_times() const {
  std::vector<double> taus;
  taus.reserve(durations.size());
  double acc = 0.0;
  for (double s : durations) {
    acc += s;
    taus.push_back(acc);
  }
  return taus;
}

std::vector<double> SwitchSchedule::switch_times(double horizon) const {
  auto taus = cumulative_times();
  if (!taus.empty()) taus.pop_back();
  std::vector<double> inside;
  for (double t : taus)
    if (t > 0.0 && t < horizon) inside.push_back(t);
  return inside;
}

StepSignal::StepSignal(std::vector<double> breaks, std::vector<int> values, double horizon)
    : breaks_(std::move(breaks)), values_(std::move(values)), horizon_(horizon) {
  if (values_.size() != breaks_.size() + 1)
    throw ValidationError("signal: need exactly one more value than breakpoints");
  for (std::size_t i = 1; i < breaks_.size(); ++i)
    if (!(breaks_[i] > breaks_[i - 1])) throw ValidationError("signal: breakpoints must increase");
}

int StepSignal::at(double t) const {
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
  return values_[static_cast<std::size_t>(it - breaks_.begin())];
}

double StepSignal::average(double t0, double t1) const {
  if (!(t1 > t0)) return at(t0);
  double acc = 0.0;
  double left = t0;
  auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t0);
  std::size_t piece = static_cast<std::size_t>(it - breaks_.begin());
  while (left < t1) {
    const double right = piece < breaks_.size() ? std::min(breaks_[piece], t1) : t1;
    acc += values_[piece] * (right - left);
    left = right;
    ++piece;
  }
  return acc / (t1 - t0);
}

StepSignal StepSignal::complement() const {
  std::vector<int> flipped(values_.size());
  std::transform(values_.begin(), values_.end(), flipped.begin(), [](int u) { return 1 - u; });
  return StepSignal(breaks_, std::move(flipped), horizon_);
}

StepSignal reconstruct_control(const SwitchSchedule& sched, double horizon) {
  if (sched.u0 != 0 && sched.u0 != 1) throw ValidationError("schedule: u0 must be 0 or 1");
  for (std::size_t i = 0; i < sched.durations.size(); ++i)
    if (!(sched.durations[i] > 0.0))
      throw ValidationError("schedule: duration " + std::to_string(i + 1) + " is not positive");
  std::vector<double> breaks;
  std::vector<int> values{sched.u0};
  for (double tau : sched.switch_times(horizon)) {
    breaks.push_back(tau);
    values.push_back(1 - values.back());
  }
  return StepSignal(std::move(breaks), std::move(values), horizon);
}

std::vector<StepSignal> phase_signals(const SwitchSchedule& sched, std::size_t n_edges, double horizon) {
  if (n_edges == 0) throw ValidationError("schedule: a light needs at least one edge");
  if (n_edges <= 2) {
    StepSignal u = reconstruct_control(sched, horizon);
    if (n_edges == 1) return {u};
    return {u, u.complement()};
  }
  if (sched.u0 < 0 || static_cast<std::size_t>(sched.u0) >= n_edges)
    throw ValidationError("schedule: initial phase must index a lighted edge");
  for (std::size_t i = 0; i < sched.durations.size(); ++i)
    if (!(sched.durations[i] > 0.0))
      throw ValidationError("schedule: duration " + std::to_string(i + 1) + " is not positive");
  const auto breaks = sched.switch_times(horizon);
  std::vector<StepSignal> out;
  for (std::size_t k = 0; k < n_edges; ++k) {
    std::vector<int> values;
    for (std::size_t i = 0; i <= breaks.size(); ++i)
      values.push_back((static_cast<std::size_t>(sched.u0) + i) % n_edges == k ? 0 : 1);
    out.emplace_back(breaks, std::move(values), horizon);
  }
  return out;
}

std::vector<double> project_durations(const std::vector<double>& durations, double t_green,
                                      double t_red) {
  if (!(t_green < t_red)) throw ValidationError("projection: need T_G < T_R");
  std::vector<double> out(durations.size());
  std::transform(durations.begin(), durations.end(), out.begin(),
                 [&](double s) { return std::max(t_green, std::min(s, t_red)); });
  return out;
}

std::vector<StepSignal> junction_signal_complement(const std::vector<StepSignal>& incoming,
                                                   std::size_t n_incoming) {
  std::vector<StepSignal> signals = incoming;
  if (n_incoming == 2 && signals.size() == 1) signals.push_back(signals.front().complement());
  if (signals.size() != n_incoming)
    throw ValidationError("junction signals: expected " + std::to_string(n_incoming) +
                          " signals, got " + std::to_string(signals.size()));
  if (signals.empty()) return signals;

  std::set<double> cuts;
  for (const auto& s : signals) cuts.insert(s.breaks().begin(), s.breaks().end());
  std::vector<double> starts{0.0};
  starts.insert(starts.end(), cuts.begin(), cuts.end());
  const double horizon = signals.front().horizon();
  for (std::size_t k = 0; k < starts.size(); ++k) {
    const double t = starts[k];
    int red = 0;
    for (const auto& s : signals) red += s.at(t);
    if (red + 1 != static_cast<int>(n_incoming)) {
      std::ostringstream msg;
      msg << "junction signals: " << (static_cast<int>(n_incoming) - red)
          << " green edges on [" << t << ", " << (k + 1 < starts.size() ? starts[k + 1] : horizon)
          << "), expected exactly one";
      throw ValidationError(msg.str());
    }
  }
  return signals;
}

std::vector<std::string> asymmetric_phase_violations(const SwitchSchedule& sched, double horizon) {
  std::vector<std::string> out;
  const auto taus = sched.cumulative_times();
  int u = sched.u0;
  double start = 0.0;
  for (std::size_t i = 0; i < sched.durations.size() && start < horizon; ++i) {
    const double len = sched.durations[i];
    std::ostringstream msg;
    if (u == 1 && !(len < sched.t_red))
      msg << "phase " << i + 1 << " is red for " << len << " >= T_R = " << sched.t_red;
    if (u == 0 && !(len > sched.t_green))
      msg << "phase " << i + 1 << " is green for " << len << " <= T_G = " << sched.t_green;
    if (!msg.str().empty()) out.push_back(msg.str());
    start = taus[i];
    u = 1 - u;
  }
  return out;
}

}  // namespace nltraffic
