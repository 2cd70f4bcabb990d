#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>

#include "nltraffic/avfleet.hpp"
#include "nltraffic/cli.hpp"
#include "nltraffic/errors.hpp"
#include "nltraffic/optimizer.hpp"
#include "nltraffic/output.hpp"

namespace py = pybind11;
using namespace nltraffic;

namespace {

/// Schedule of light group 0 with optional overrides.
SwitchSchedule schedule_for(const Scenario& scn, std::optional<int> u0, std::optional<std::vector<double>> durations) {
  if (scn.lights.empty()) throw ValidationError("scenario has no traffic light");
  SwitchSchedule s = scn.lights[0].schedule.value_or(SwitchSchedule{});
  if (u0) s.u0 = *u0;
  if (durations) s.durations = *durations;
  if (s.durations.empty()) throw ValidationError("light group 0 has no switching schedule");
  return s;
}

py::array_t<double> stack(const std::vector<DensityField>& frames, std::size_t width) {
  py::array_t<double> out({frames.size(), width});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t n = 0; n < frames.size(); ++n)
    for (std::size_t i = 0; i < width; ++i) view(n, i) = frames[n].values[i];
  return out;
}

py::dict edge_layout(const Scenario& scn, const Grid& grid) {
  py::dict edges;
  for (const auto& g : grid.edges()) {
    py::dict e;
    e["offset"] = g.offset;
    e["cells"] = g.n_cells;
    e["dx"] = g.dx;
    e["length"] = g.length;
    edges[py::str(scn.network.edge(g.edge).name)] = e;
  }
  return edges;
}

py::dict cost_dict(const CostBreakdown& c) {
  py::dict d;
  d["J"] = c.total;
  d["velocity_term"] = c.velocity_term;
  d["feedback_term"] = c.feedback_term;
  d["M"] = c.total_mass;
  d["vbar"] = c.total_mass > 0.0 ? py::cast(c.mean_velocity()) : py::none();
  return d;
}

py::dict simulate(const Scenario& scn, std::optional<int> u0, std::optional<std::vector<double>> durations,
                  bool adjoint) {
  const ForwardSolver solver(scn);
  const LightControl control = (u0 || durations) ? LightControl::with_schedule(scn, schedule_for(scn, u0, durations))
                                                 : LightControl::from_scenario(scn);
  const ForwardResult fwd = solver.run(control);
  py::dict out;
  out["times"] = fwd.trajectory.times;
  out["density"] = stack(fwd.trajectory.snapshots, fwd.grid.total_cells());
  out["edges"] = edge_layout(scn, fwd.grid);
  out["cost"] = cost_dict(evaluate_cost(scn, fwd));
  out["balance_residual"] = fwd.balance.relative_residual();
  out["clipped"] = fwd.balance.clipped;
  if (adjoint) out["adjoint"] = stack(solve_adjoint(solver, fwd).values, fwd.grid.total_cells());
  return out;
}

py::dict evaluate(const Scenario& scn, std::optional<int> u0, std::optional<std::vector<double>> durations) {
  const ForwardSolver solver(scn);
  const Evaluation ev = evaluate_schedule(solver, schedule_for(scn, u0, durations));
  py::dict out = cost_dict(ev.cost);
  out["gradient"] = ev.gradient.durations;
  out["switch_times"] = ev.gradient.switch_times;
  out["warnings"] = ev.gradient.warnings;
  return out;
}

py::list sweep(const Scenario& scn, std::size_t samples, unsigned threads) {
  const SweepResult r = sweep_single_switch(ForwardSolver(scn), samples, threads);
  py::list rows;
  for (const auto& p : r.points) rows.append(py::make_tuple(p.tau, p.cost, p.mean_velocity));
  return rows;
}

py::dict report_dict(const DescentReport& r) {
  py::dict d;
  d["durations"] = r.best.durations;
  d["J"] = r.best_cost;
  d["termination"] = to_string(r.termination);
  d["vi_residual"] = r.vi_residual;
  d["evaluations"] = r.evaluations;
  py::list history;
  for (const auto& it : r.iterates) history.append(py::make_tuple(it.iter, it.cost, it.durations, it.beta));
  d["iterates"] = history;
  return d;
}

py::dict optimize(const Scenario& scn, std::size_t starts, std::uint64_t seed, double eps, double beta0,
                  int max_iter, unsigned threads) {
  DescentOptions opt;
  opt.tolerance = eps;
  opt.beta0 = beta0;
  opt.max_iter = max_iter;
  const MultiStartReport r = multi_start(ForwardSolver(scn), schedule_for(scn, {}, {}), starts, seed, opt, threads);
  py::dict out;
  out["best_index"] = r.best_index;
  out["best"] = report_dict(r.best());
  py::list runs;
  for (const auto& run : r.runs) runs.append(report_dict(run));
  out["runs"] = runs;
  return out;
}

py::list gradcheck(const Scenario& scn, std::optional<int> u0, std::optional<std::vector<double>> durations,
                   double delta_steps) {
  const auto rows = gradient_check(ForwardSolver(scn), schedule_for(scn, u0, durations), delta_steps);
  py::list out;
  for (const auto& r : rows) out.append(py::make_tuple(r.component, r.analytic, r.finite_diff, r.rel_err));
  return out;
}

py::dict avsim(const Scenario& scn) {
  const CoupledResult r = simulate_coupled(scn);
  py::dict out;
  out["times"] = r.drivers.trajectory.times;
  out["density"] = stack(r.drivers.trajectory.snapshots, r.drivers.grid.total_cells());
  out["fleet"] = stack(r.fleet.snapshots, r.drivers.grid.total_cells());
  out["edges"] = edge_layout(scn, r.drivers.grid);
  out["fleet_mass"] = py::make_tuple(r.fleet_balance.initial, r.fleet_balance.final, r.fleet_balance.outflow);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Nonlocal traffic flow on road networks with optimized traffic lights";
  m.attr("__version__") = library_version();

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ConstraintError>(m, "ConstraintError", base.ptr());
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
  py::register_exception<CflError>(m, "CflError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());
  py::register_exception<UnsupportedError>(m, "UnsupportedError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::class_<Scenario>(m, "Scenario")
      .def_static("load", [](const std::string& arg) { return parse_scenario(resolve_scenario_path(arg)); },
                  py::arg("path_or_name"))
      .def_static("from_text", &parse_scenario_text, py::arg("text"), py::arg("origin") = "<string>")
      .def("to_text", &write_scenario)
      .def_readonly("name", &Scenario::name)
      .def_readonly("horizon", &Scenario::horizon)
      .def_property_readonly("edges",
                             [](const Scenario& s) {
                               std::vector<std::string> names;
                               for (const auto& e : s.network.edges()) names.push_back(e.name);
                               return names;
                             })
      .def_property_readonly("durations",
                             [](const Scenario& s) -> std::optional<std::vector<double>> {
                               if (s.lights.empty() || !s.lights[0].schedule) return std::nullopt;
                               return s.lights[0].schedule->durations;
                             })
      .def("__repr__", [](const Scenario& s) {
        return "<Scenario '" + s.name + "' with " + std::to_string(s.network.edge_count()) + " edges>";
      });

  m.def("simulate", &simulate, py::arg("scenario"), py::arg("u0") = py::none(), py::arg("durations") = py::none(),
        py::arg("adjoint") = false,
        "Forward solve. Returns times, the stacked density (time x cell), the edge layout, the cost and the mass "
        "balance residual; with adjoint=True also the multiplier.");
  m.def("evaluate", &evaluate, py::arg("scenario"), py::arg("u0") = py::none(), py::arg("durations") = py::none(),
        "Cost and duration gradient of one schedule.");
  m.def("sweep", &sweep, py::arg("scenario"), py::arg("samples") = 50, py::arg("threads") = 0,
        "Single-switch sweep: list of (tau, J, vbar).");
  m.def("optimize", &optimize, py::arg("scenario"), py::arg("starts") = 8, py::arg("seed") = 7,
        py::arg("eps") = 1e-7, py::arg("beta0") = 1.0, py::arg("max_iter") = 200, py::arg("threads") = 0,
        "Multi-start projected gradient descent.");
  m.def("gradient_check", &gradcheck, py::arg("scenario"), py::arg("u0") = py::none(),
        py::arg("durations") = py::none(), py::arg("delta_steps") = 2.0,
        "Rows (component, analytic, finite difference, relative error).");
  m.def("simulate_coupled", &avsim, py::arg("scenario"), "Drivers and autonomous fleet, stepped together.");
  m.def(
      "run_cli", [](std::vector<std::string> args) {
        args.insert(args.begin(), "nltraffic");
        return run_command(args);
      },
      py::arg("args"), "Runs one command-line invocation and returns its exit code.");
}
