#include "nltraffic/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "nltraffic/avfleet.hpp"
#include "nltraffic/errors.hpp"
#include "nltraffic/optimizer.hpp"
#include "nltraffic/output.hpp"

namespace nltraffic {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::string scenario;
  std::string out_dir;
  double cfl = -1.0;
  std::string limiter;
};

struct ScheduleOverride {
  int u0 = -1;
  std::vector<double> durations;
};

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
  return s;
}

const char* limiter_name(Limiter l) {
  switch (l) {
    case Limiter::superbee:
      return "superbee";
    case Limiter::minmod:
      return "minmod";
    case Limiter::none:
      return "none";
  }
  return "?";
}

/// Holds the manifest and the list of files written so far.
class Run {
 public:
  Run(std::string command, const Common& common) : dir_(common.out_dir) {
    manifest_.command = std::move(command);
    manifest_.scenario = common.scenario;
    manifest_.version = library_version();
    manifest_.timestamp = utc_timestamp();
  }

  RunManifest& manifest() { return manifest_; }
  fs::path path(const std::string& name) const { return dir_ / name; }

  void start(const std::vector<std::string>& planned) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory '" + dir_.string() + "': " + ec.message());
    manifest_.outputs = planned;
    manifest_.write(dir_ / "manifest.json");
  }

  void finish() {
    manifest_.status = "ok";
    manifest_.write(dir_ / "manifest.json");
  }

  void fail(const char* kind, const std::string& message) {
    manifest_.status = "error";
    manifest_.error_kind = kind;
    manifest_.error_message = message;
    std::vector<std::string> present;
    for (const auto& o : manifest_.outputs)
      if (fs::exists(dir_ / o)) present.push_back(o);
    manifest_.outputs = present;
    std::error_code ec;
    if (fs::is_directory(dir_, ec)) manifest_.write(dir_ / "manifest.json");
  }

 private:
  fs::path dir_;
  RunManifest manifest_;
};

Scenario load(const Common& c, const ScheduleOverride* sched, RunManifest& manifest) {
  const fs::path path = resolve_scenario_path(c.scenario);
  manifest.scenario = path.string();
  Scenario scn = parse_scenario(path);
  if (c.cfl > 0.0) scn.grid.cfl = c.cfl;
  if (!c.limiter.empty()) {
    if (c.limiter == "superbee") scn.grid.limiter = Limiter::superbee;
    else if (c.limiter == "minmod") scn.grid.limiter = Limiter::minmod;
    else if (c.limiter == "none") scn.grid.limiter = Limiter::none;
    else throw ValidationError("unknown limiter '" + c.limiter + "' (superbee, minmod, none)");
  }
  scn.grid.record_stride = 1;
  if (sched && (sched->u0 >= 0 || !sched->durations.empty())) {
    if (scn.lights.empty()) throw ValidationError("--u0/--durations given but the scenario has no light");
    auto& light = scn.lights[0];
    SwitchSchedule s = light.schedule.value_or(SwitchSchedule{});
    if (sched->u0 >= 0) s.u0 = sched->u0;
    if (!sched->durations.empty()) s.durations = sched->durations;
    light.schedule = s;
    light.fixed.clear();
  }
  validate(scn);
  manifest.config["cfl"] = format_number(scn.grid.cfl);
  manifest.config["limiter"] = limiter_name(scn.grid.limiter);
  manifest.config["horizon"] = format_number(scn.horizon);
  if (!scn.lights.empty() && scn.lights[0].schedule) {
    manifest.config["u0"] = std::to_string(scn.lights[0].schedule->u0);
    manifest.config["durations"] = join(scn.lights[0].schedule->durations);
  }
  return scn;
}

const SwitchSchedule& schedule_of(const Scenario& scn) {
  if (scn.lights.empty() || !scn.lights[0].schedule)
    throw ValidationError("scenario '" + scn.name + "' has no switching schedule on its first light");
  return *scn.lights[0].schedule;
}

std::vector<std::size_t> output_nodes(std::size_t steps, int stride) {
  std::vector<std::size_t> nodes;
  for (std::size_t n = 0; n <= steps; n += static_cast<std::size_t>(stride)) nodes.push_back(n);
  if (nodes.back() != steps) nodes.push_back(steps);
  return nodes;
}

std::size_t nearest_node(const std::vector<double>& times, double t) {
  if (t < times.front() || t > times.back())
    throw RangeError("snapshot time " + format_number(t) + " outside [0, " + format_number(times.back()) + "]");
  const double dt = times[1] - times[0];
  return std::min(times.size() - 1, static_cast<std::size_t>(std::llround(t / dt)));
}

/// Speeds at every time node: the step velocities plus one evaluation at T.
std::vector<VelocityField> node_velocities(const ForwardSolver& solver, const ForwardResult& fwd,
                                           const LightControl& control, const PointValues* final_slowdown) {
  std::vector<VelocityField> v = fwd.velocities;
  const double horizon = solver.times().back();
  v.push_back(solver.velocity().evaluate(fwd.trajectory.snapshots.back(), control.average(horizon, horizon),
                                         final_slowdown));
  return v;
}

void write_frames(Run& run, const std::string& name, const Grid& grid, const SpaceTimeField& traj,
                  const std::vector<VelocityField>& v, const AdjointField* adj, const std::vector<std::size_t>& nodes) {
  std::vector<FieldFrame> frames;
  for (std::size_t n : nodes)
    frames.push_back({traj.times[n], &traj.snapshots[n], v.empty() ? nullptr : &v[n], adj ? &adj->values[n] : nullptr});
  write_field_csv(run.path(name), grid, frames, adj != nullptr);
}

void print_summary(const CostBreakdown& c) {
  std::cout << "J = " << format_number(c.total) << "\nM = " << format_number(c.total_mass) << "\n";
  if (c.total_mass > 0.0) std::cout << "vbar = " << format_number(c.mean_velocity()) << "\n";
}

int fail_with(Run* run, int code, const char* kind, const std::string& message) {
  std::cerr << "{\"error\": \"" << kind << "\", \"message\": \"";
  for (char ch : message) {
    if (ch == '"' || ch == '\\') std::cerr << '\\';
    std::cerr << (ch == '\n' ? ' ' : ch);
  }
  std::cerr << "\", \"exit_code\": " << code << "}\n";
  if (run) {
    try {
      run->fail(kind, message);
    } catch (...) {
    }
  }
  return code;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
  CLI::App app{"Nonlocal traffic flow on road networks: simulation and traffic-light optimization", "nltraffic"};
  app.set_version_flag("--version", std::string(library_version()));
  app.require_subcommand(1);
  app.footer(
      "Exit codes: 0 success, 2 usage error, 3 invalid scenario or schedule, 4 input/output failure, "
      "5 solver failure (CFL, non-finite values), 6 unsupported topology, 70 internal error.\n"
      "The output directory defaults to $NLTRAFFIC_OUT_DIR, else ./out.");

  Common common;
  const char* env_out = std::getenv("NLTRAFFIC_OUT_DIR");
  common.out_dir = env_out ? env_out : "out";
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", common.scenario, "Scenario file or bundled scenario name")->required();
    sub->add_option("--out-dir", common.out_dir, "Output directory")->capture_default_str();
    sub->add_option("--cfl", common.cfl, "Override the CFL number (0, 1]");
    sub->add_option("--limiter", common.limiter, "Override the limiter: superbee, minmod or none");
  };
  ScheduleOverride sched;
  auto add_schedule = [&](CLI::App* sub) {
    sub->add_option("--u0", sched.u0, "Initial light state (1 = red on the first lighted edge)")
        ->check(CLI::Range(0, 1));
    sub->add_option("--durations", sched.durations, "Comma-separated switching durations")->delimiter(',');
  };

  int stride = 1;
  std::vector<double> snaps;
  bool with_adjoint = false;
  auto* simulate = app.add_subcommand("simulate", "Forward simulation; writes the field CSV");
  add_common(simulate);
  add_schedule(simulate);
  simulate->add_option("--stride", stride, "Write every k-th time node")->check(CLI::PositiveNumber);
  simulate->add_option("--snap", snaps, "Comma-separated snapshot times, one CSV each")->delimiter(',');
  simulate->add_flag("--adjoint", with_adjoint, "Also solve the adjoint and add a lambda column");

  auto* avsim = app.add_subcommand("avsim", "Coupled simulation of drivers and an autonomous fleet");
  add_common(avsim);
  avsim->add_option("--stride", stride, "Write every k-th time node")->check(CLI::PositiveNumber);

  std::size_t samples = 50;
  unsigned threads = 0;
  auto* sweep = app.add_subcommand("sweep", "Exhaustive single-switch search over tau");
  add_common(sweep);
  sweep->add_option("--samples", samples, "Number of tau samples")->capture_default_str()->check(CLI::Range(3, 1000000));
  sweep->add_option("--threads", threads, "Worker threads (0 = all cores)");

  std::size_t starts = 8;
  std::uint64_t seed = 7;
  DescentOptions dopt;
  auto* optimize = app.add_subcommand("optimize", "Multi-start projected gradient descent on the durations");
  add_common(optimize);
  optimize->add_option("--starts", starts, "Number of random starts")->capture_default_str()->check(CLI::PositiveNumber);
  optimize->add_option("--seed", seed, "Random seed")->capture_default_str();
  optimize->add_option("--eps", dopt.tolerance, "Stop when |J_{k+1} - J_k| < eps")->capture_default_str();
  optimize->add_option("--beta0", dopt.beta0, "Initial line-search step")->capture_default_str();
  optimize->add_option("--max-iter", dopt.max_iter, "Iteration cap per start")->capture_default_str();
  optimize->add_option("--threads", threads, "Worker threads (0 = all cores)");

  double delta_steps = 2.0;
  auto* gradcheck = app.add_subcommand("gradcheck", "Adjoint gradient against central finite differences");
  add_common(gradcheck);
  add_schedule(gradcheck);
  gradcheck->add_option("--delta-steps", delta_steps, "Difference step in units of dt")->capture_default_str();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return exit_ok;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return exit_ok;
  } catch (const CLI::CallForVersion&) {
    std::cout << library_version() << "\n";
    return exit_ok;
  } catch (const CLI::ParseError& e) {
    return fail_with(nullptr, exit_usage, "usage", e.what());
  }

  CLI::App* sub = app.get_subcommands().front();
  std::unique_ptr<Run> run;
  try {
    run = std::make_unique<Run>(sub->get_name(), common);
    RunManifest& mf = run->manifest();
    mf.config["out_dir"] = common.out_dir;

    if (sub == simulate) {
      const Scenario scn = load(common, &sched, mf);
      mf.config["stride"] = std::to_string(stride);
      mf.config["adjoint"] = with_adjoint ? "true" : "false";
      mf.config["snap"] = join(snaps);
      const ForwardSolver solver(scn);
      std::vector<std::size_t> snap_nodes;
      for (double t : snaps) snap_nodes.push_back(nearest_node(solver.times(), t));
      std::vector<std::string> planned{"field.csv"};
      for (std::size_t k = 0; k < snaps.size(); ++k) planned.push_back("snap_" + std::to_string(k + 1) + ".csv");
      run->start(planned);

      const LightControl control = LightControl::from_scenario(scn);
      const ForwardResult fwd = solver.run(control);
      const auto v = node_velocities(solver, fwd, control, nullptr);
      std::optional<AdjointField> adj;
      if (with_adjoint) adj = solve_adjoint(solver, fwd);
      const AdjointField* ap = adj ? &*adj : nullptr;
      write_frames(*run, "field.csv", fwd.grid, fwd.trajectory, v, ap,
                   output_nodes(fwd.trajectory.steps(), stride));
      for (std::size_t k = 0; k < snap_nodes.size(); ++k)
        write_frames(*run, planned[k + 1], fwd.grid, fwd.trajectory, v, ap, {snap_nodes[k]});
      print_summary(evaluate_cost(scn, fwd));
      std::cout << "mass balance residual = " << format_number(fwd.balance.relative_residual()) << "\n";
    } else if (sub == avsim) {
      const Scenario scn = load(common, nullptr, mf);
      mf.config["stride"] = std::to_string(stride);
      const ForwardSolver solver(scn);
      run->start({"field.csv", "fleet.csv"});
      const LightControl control = LightControl::from_scenario(scn);
      const CoupledResult r = simulate_coupled(solver, control);
      const InteractionOperator fleet_kernel(scn.network, solver.grid(), scn.fleet->kernel);
      std::optional<PointValues> slow;
      if (!fleet_kernel.empty()) slow = fleet_kernel.apply(r.fleet.snapshots.back());
      const auto v = node_velocities(solver, r.drivers, control, slow ? &*slow : nullptr);
      const auto nodes = output_nodes(r.drivers.trajectory.steps(), stride);
      write_frames(*run, "field.csv", r.drivers.grid, r.drivers.trajectory, v, nullptr, nodes);
      write_frames(*run, "fleet.csv", r.drivers.grid, r.fleet, {}, nullptr, nodes);
      print_summary(evaluate_cost(scn, r.drivers));
      std::cout << "fleet mass: initial " << format_number(r.fleet_balance.initial) << ", final "
                << format_number(r.fleet_balance.final) << ", outflow " << format_number(r.fleet_balance.outflow)
                << "\n";
    } else if (sub == sweep) {
      const Scenario scn = load(common, nullptr, mf);
      mf.config["samples"] = std::to_string(samples);
      const ForwardSolver solver(scn);
      run->start({"sweep.csv"});
      const SweepResult res = sweep_single_switch(solver, samples, threads);
      write_sweep_csv(run->path("sweep.csv"), res);
      std::cout << "max vbar = " << format_number(res.points[res.argmax.front()].mean_velocity) << " at tau =";
      for (std::size_t k : res.argmax) std::cout << " " << format_number(res.points[k].tau);
      std::cout << "\n";
    } else if (sub == optimize) {
      const Scenario scn = load(common, nullptr, mf);
      mf.seed = seed;
      mf.config["starts"] = std::to_string(starts);
      mf.config["eps"] = format_number(dopt.tolerance);
      mf.config["beta0"] = format_number(dopt.beta0);
      mf.config["max_iter"] = std::to_string(dopt.max_iter);
      mf.config["armijo"] = format_number(dopt.armijo);
      mf.config["max_halvings"] = std::to_string(dopt.max_halvings);
      const SwitchSchedule& shape = schedule_of(scn);
      const ForwardSolver solver(scn);
      std::vector<std::string> planned{"best.csv", "starts.csv"};
      for (std::size_t i = 0; i < starts; ++i) planned.push_back("descent_" + std::to_string(i + 1) + ".csv");
      run->start(planned);
      const MultiStartReport rep = multi_start(solver, shape, starts, seed, dopt, threads);
      const std::size_t S = shape.durations.size();
      write_descent_csv(run->path("best.csv"), rep.best(), S);
      for (std::size_t i = 0; i < starts; ++i) write_descent_csv(run->path(planned[i + 2]), rep.runs[i], S);
      {
        CsvWriter csv(run->path("starts.csv"), {"start", "J", "iterations", "evaluations", "vi_residual"});
        for (std::size_t i = 0; i < starts; ++i) {
          const auto& r = rep.runs[i];
          csv.row({static_cast<double>(i + 1), r.best_cost, static_cast<double>(r.iterates.size() - 1),
                   static_cast<double>(r.evaluations), r.vi_residual});
        }
        csv.close();
      }
      const auto& best = rep.best();
      std::cout << "best start " << rep.best_index + 1 << ": J = " << format_number(best.best_cost)
                << ", durations = " << join(best.best.durations) << " (" << to_string(best.termination) << ")\n";
      for (const auto& w : best.warnings) std::cerr << "warning: " << w << "\n";
    } else if (sub == gradcheck) {
      const Scenario scn = load(common, &sched, mf);
      mf.config["delta_steps"] = format_number(delta_steps);
      const ForwardSolver solver(scn);
      run->start({"gradcheck.csv"});
      const auto rows = gradient_check(solver, schedule_of(scn), delta_steps);
      write_gradcheck_csv(run->path("gradcheck.csv"), rows);
      for (const auto& r : rows)
        std::cout << "s_" << r.component << ": analytic " << format_number(r.analytic) << ", fd "
                  << format_number(r.finite_diff) << ", rel " << format_number(r.rel_err) << "\n";
    }
    run->finish();
    return exit_ok;
  } catch (const UnsupportedError& e) {
    return fail_with(run.get(), exit_unsupported, e.kind(), e.what());
  } catch (const IoError& e) {
    return fail_with(run.get(), exit_io, e.kind(), e.what());
  } catch (const CflError& e) {
    return fail_with(run.get(), exit_solver, e.kind(), e.what());
  } catch (const SolverError& e) {
    return fail_with(run.get(), exit_solver, e.kind(), e.what());
  } catch (const Error& e) {
    return fail_with(run.get(), exit_validation, e.kind(), e.what());
  } catch (const std::exception& e) {
    return fail_with(run.get(), exit_internal, "internal", e.what());
  }
}

int run_command(int argc, const char* const* argv) {
  return run_command(std::vector<std::string>(argv, argv + argc));
}

}  // namespace nltraffic
