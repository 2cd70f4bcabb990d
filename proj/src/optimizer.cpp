#include "nltraffic/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <thread>

#include "nltraffic/errors.hpp"

namespace nltraffic {

const char* to_string(Termination t) {
  switch (t) {
    case Termination::tolerance:
      return "tolerance";
    case Termination::max_iter:
      return "max-iter";
    case Termination::line_search_failure:
      return "line-search-failure";
    case Termination::stationary:
      return "stationary";
  }
  return "unknown";
}

double variational_residual(const std::vector<double>& durations, const std::vector<double>& gradient, double t_green,
                            double t_red) {
  if (durations.size() != gradient.size()) throw ShapeError("gradient and durations differ in length");
  std::vector<double> trial(durations.size());
  for (std::size_t i = 0; i < durations.size(); ++i) trial[i] = durations[i] - gradient[i];
  trial = project_durations(trial, t_green, t_red);
  double r = 0.0;
  for (std::size_t i = 0; i < durations.size(); ++i) r = std::max(r, std::abs(durations[i] - trial[i]));
  return r;
}

namespace {

void merge_warnings(std::vector<std::string>& into, const std::vector<std::string>& from) {
  for (const auto& w : from)
    if (std::find(into.begin(), into.end(), w) == into.end()) into.push_back(w);
}

/// Runs `task(i)` for i in [0, n) on up to `threads` workers and rethrows the
/// first failure.
template <class Task>
void parallel_for(std::size_t n, unsigned threads, Task&& task) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = n;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

DescentReport descend(const ForwardSolver& solver, const SwitchSchedule& s0, const DescentOptions& opt) {
  if (opt.max_iter < 0 || opt.max_halvings < 0) throw ValidationError("descent: iteration limits must be nonnegative");
  if (!(opt.beta0 > 0.0)) throw ValidationError("descent: beta0 must be positive");
  if (!(s0.t_green > 0.0 && s0.t_green < s0.t_red))
    throw ValidationError("descent: the schedule needs box bounds 0 < T_G < T_R");

  DescentReport rep;
  SwitchSchedule s = s0;
  s.durations = project_durations(s.durations, s.t_green, s.t_red);

  Evaluation ev = evaluate_schedule(solver, s, true, opt.adjoint);
  ++rep.evaluations;
  merge_warnings(rep.warnings, ev.gradient.warnings);
  rep.iterates.push_back({0, s.durations, ev.cost.total, 0.0});
  rep.termination = Termination::max_iter;

  for (int k = 0; k < opt.max_iter; ++k) {
    const auto& g = ev.gradient.durations;
    if (variational_residual(s.durations, g, s.t_green, s.t_red) < opt.gradient_floor) {
      rep.termination = Termination::stationary;
      break;
    }
    bool accepted = false;
    double beta = opt.beta0;
    SwitchSchedule trial = s;
    double trial_cost = 0.0;
    for (int h = 0; h <= opt.max_halvings; ++h, beta *= 0.5) {
      std::vector<double> step(s.durations.size());
      for (std::size_t i = 0; i < step.size(); ++i) step[i] = s.durations[i] - beta * g[i];
      trial.durations = project_durations(step, s.t_green, s.t_red);
      double decrease = 0.0;
      for (std::size_t i = 0; i < step.size(); ++i) decrease += g[i] * (s.durations[i] - trial.durations[i]);
      if (trial.durations == s.durations) break;
      trial_cost = evaluate_schedule(solver, trial, false, opt.adjoint).cost.total;
      ++rep.evaluations;
      if (trial_cost <= ev.cost.total - opt.armijo * decrease && trial_cost < ev.cost.total) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      rep.termination = Termination::line_search_failure;
      break;
    }
    const double previous = ev.cost.total;
    s = trial;
    ev = evaluate_schedule(solver, s, true, opt.adjoint);
    ++rep.evaluations;
    merge_warnings(rep.warnings, ev.gradient.warnings);
    rep.iterates.push_back({static_cast<std::size_t>(k + 1), s.durations, ev.cost.total, beta});
    if (std::abs(ev.cost.total - previous) < opt.tolerance) {
      rep.termination = Termination::tolerance;
      break;
    }
  }

  // Iterates only ever decrease J, so the last one is the best.
  rep.best = s;
  rep.best_cost = ev.cost.total;
  rep.vi_residual = variational_residual(s.durations, ev.gradient.durations, s.t_green, s.t_red);
  return rep;
}

std::vector<SwitchSchedule> random_starts(const SwitchSchedule& shape, std::size_t n_starts, std::uint64_t seed) {
  if (n_starts == 0) throw ValidationError("multi-start: need at least one start");
  if (!(shape.t_green < shape.t_red)) throw ValidationError("multi-start: T_G must be below T_R");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> law(shape.t_green, shape.t_red);
  std::vector<SwitchSchedule> starts(n_starts, shape);
  for (auto& s : starts)
    for (auto& d : s.durations) d = law(rng);
  return starts;
}

MultiStartReport multi_start(const ForwardSolver& solver, const SwitchSchedule& shape, std::size_t n_starts,
                             std::uint64_t seed, const DescentOptions& opt, unsigned threads) {
  MultiStartReport rep;
  rep.starts = random_starts(shape, n_starts, seed);
  rep.runs.resize(n_starts);
  parallel_for(n_starts, threads, [&](std::size_t i) { rep.runs[i] = descend(solver, rep.starts[i], opt); });
  for (std::size_t i = 1; i < n_starts; ++i)
    if (rep.runs[i].best_cost < rep.runs[rep.best_index].best_cost) rep.best_index = i;
  return rep;
}

SweepResult sweep_single_switch(const ForwardSolver& solver, std::size_t n_samples, unsigned threads) {
  if (n_samples < 3) throw ValidationError("sweep: need at least 3 samples");
  const Scenario& scn = solver.scenario();
  if (scn.lights.empty()) throw ValidationError("sweep: scenario has no traffic light");
  const double horizon = scn.horizon;
  SwitchSchedule base;
  base.u0 = scn.lights[0].schedule ? scn.lights[0].schedule->u0 : 1;

  SweepResult out;
  out.points.resize(n_samples);
  parallel_for(n_samples, threads, [&](std::size_t k) {
    const double tau = horizon * static_cast<double>(k + 1) / static_cast<double>(n_samples + 1);
    SwitchSchedule s = base;
    s.durations = {tau, horizon - tau};
    const CostBreakdown c = evaluate_schedule(solver, s, false).cost;
    out.points[k] = {tau, c.total, c.total_mass > 0.0 ? c.mean_velocity() : 0.0};
  });
  double best = out.points.front().mean_velocity;
  for (const auto& p : out.points) best = std::max(best, p.mean_velocity);
  for (std::size_t k = 0; k < n_samples; ++k)
    if (out.points[k].mean_velocity == best) out.argmax.push_back(k);
  return out;
}

std::vector<GradcheckRow> gradient_check(const ForwardSolver& solver, const SwitchSchedule& sched, double delta_steps,
                                         const AdjointOptions& opt) {
  if (!(delta_steps > 0.0)) throw ValidationError("gradcheck: the difference step must be positive");
  const auto& times = solver.times();
  const double delta = delta_steps * (times[1] - times[0]);
  const Evaluation ev = evaluate_schedule(solver, sched, true, opt);
  std::vector<GradcheckRow> rows(sched.durations.size());
  parallel_for(rows.size(), 0, [&](std::size_t k) {
    SwitchSchedule plus = sched;
    SwitchSchedule minus = sched;
    plus.durations[k] += delta;
    minus.durations[k] -= delta;
    if (!(minus.durations[k] > 0.0)) throw ValidationError("gradcheck: difference step exceeds a duration");
    const double jp = evaluate_schedule(solver, plus, false, opt).cost.total;
    const double jm = evaluate_schedule(solver, minus, false, opt).cost.total;
    GradcheckRow& r = rows[k];
    r.component = k + 1;
    r.analytic = ev.gradient.durations[k];
    r.finite_diff = (jp - jm) / (2.0 * delta);
    const double diff = std::abs(r.analytic - r.finite_diff);
    r.rel_err = diff == 0.0 ? 0.0 : diff / std::abs(r.finite_diff);
  });
  return rows;
}

}  // namespace nltraffic
