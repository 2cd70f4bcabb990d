#include <doctest.h>

#include <cmath>
#include <random>

#include "nltraffic/errors.hpp"
#include "nltraffic/forward.hpp"
#include "test_support.hpp"

using namespace nltraffic;
using testsupport::from_text;
using testsupport::merge_text;

namespace {

const char* free_edge = R"([network]
e1 = A -> B, 1.0
[grid]
T = 0.5
dx = 0.01
[initial]
e1 = [0.1, 0.2]
)";

double centroid(const DensityField& m, const EdgeGrid& g) {
  double mass = 0.0, moment = 0.0;
  for (std::size_t i = 0; i < g.n_cells; ++i) {
    mass += m.values[g.offset + i] * g.dx;
    moment += m.values[g.offset + i] * g.dx * g.center(i);
  }
  return moment / mass;
}

std::string smooth_edge(double dx, const char* limiter) {
  const int n = static_cast<int>(std::lround(1.0 / dx));
  std::string table;
  for (int i = 0; i < n; ++i) {
    const double x = (i + 0.5) * dx;
    const double v = x > 0.1 && x < 0.4 ? std::pow(std::sin(M_PI * (x - 0.1) / 0.3), 2) : 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    table += (i ? ", " : "") + std::string(buf);
  }
  return std::string("[network]\ne1 = A -> B, 1.0\n[grid]\nT = 0.3\ndx = ") + std::to_string(dx) +
         "\nlimiter = " + limiter + "\n[initial]\ntable.e1 = " + table + "\n";
}

}  // namespace

TEST_SUITE("forward") {
  TEST_CASE("limited flux") {
    const double dx = 0.01, dt = 0.0099;
    CHECK(limited_flux({2.0, 2.0, 2.0, true}, 0.7, dx, dt, Limiter::superbee) == doctest::Approx(1.4));
    CHECK(limited_flux({2.0, 2.0, 2.0, true}, 0.7, dx, dt, Limiter::minmod) == doctest::Approx(1.4));
    CHECK(limited_flux({0.0, 1.0, 3.0, true}, 0.0, dx, dt, Limiter::superbee) == 0.0);
    // Foot of a 0 -> 1 jump: theta = 0, phi = 0, first-order upwind.
    CHECK(limited_flux({0.0, 0.0, 1.0, true}, 1.0, dx, dt, Limiter::superbee) == 0.0);
    // Smooth ramp: theta = 1, phi = 1, Lax-Wendroff flux.
    const double f = limited_flux({1.0, 2.0, 3.0, true}, 1.0, dx, dt, Limiter::superbee);
    CHECK(f == doctest::Approx(2.0 + 0.5 * (1.0 - 0.99) * 1.0));
    CHECK(limited_flux({1.0, 2.0, 3.0, false}, 1.0, dx, dt, Limiter::superbee) == 2.0);
    CHECK(limiter_phi(Limiter::superbee, 0.5) == 1.0);
    CHECK(limiter_phi(Limiter::superbee, 3.0) == 2.0);
    CHECK(limiter_phi(Limiter::superbee, -1.0) == 0.0);
    CHECK(limiter_phi(Limiter::minmod, 0.5) == 0.5);
  }

  TEST_CASE("time nodes honour the CFL number") {
    const auto t = time_nodes(1.25, 1.0, 0.005, 0.99);
    CHECK(t.size() == 254);
    CHECK(t.back() == 1.25);
    CHECK((t[1] - t[0]) <= 0.99 * 0.005 + 1e-15);
    CHECK_THROWS_AS(time_nodes(-1.0, 1.0, 0.01, 0.9), ValidationError);
  }

  TEST_CASE("merge junction influx is the sum of the incoming outfluxes") {
    const Scenario s = from_text(merge_text("[initial]\ne1 = [0.9, 1.0]\ne2 = [0.95, 1.0] * 0.5\n"));
    const ForwardSolver solver(s);
    const Grid& g = solver.grid();
    const DensityField m = solver.initial_state();
    const VelocityField v = solver.velocity().evaluate(m, {});
    StepFluxes fl;
    const double dt = solver.times()[1];
    advance_step(s.network, g, m, v, s.matrix_p, s.inflow, 0.0, dt, solver.config(), &fl);
    const EdgeId e1 = s.network.edge_id("e1"), e2 = s.network.edge_id("e2"), e3 = s.network.edge_id("e3");
    CHECK(fl.outflow[e1] == doctest::Approx(1.0));
    CHECK(fl.outflow[e2] == doctest::Approx(0.5));
    CHECK(fl.inflow[e3] == doctest::Approx(fl.outflow[e1] + fl.outflow[e2]));
  }

  TEST_CASE("frozen flow leaves the state unchanged") {
    const Scenario s = from_text(free_edge);
    const ForwardSolver solver(s);
    const DensityField m = solver.initial_state();
    VelocityField v = solver.velocity().evaluate(m, {});
    std::fill(v.cells.begin(), v.cells.end(), 0.0);
    std::fill(v.faces.begin(), v.faces.end(), 0.0);
    const DensityField next = advance_step(s.network, solver.grid(), m, v, s.matrix_p, s.inflow, 0.0,
                                           solver.times()[1], solver.config());
    CHECK(next.values == m.values);
  }

  TEST_CASE("block on a free edge moves at unit speed") {
    const Scenario s = from_text(free_edge);
    const ForwardSolver solver(s);
    const ForwardResult r = solver.run();
    const EdgeGrid& g = solver.grid().edge(0);
    const double c0 = centroid(r.trajectory.snapshots.front(), g);
    for (std::size_t n = 10; n < r.trajectory.times.size(); n += 10)
      CHECK(std::abs(centroid(r.trajectory.snapshots[n], g) - c0 - r.trajectory.times[n]) <= g.dx);
  }

  TEST_CASE("empty network stays empty") {
    const Scenario s = from_text(merge_text(""));
    const ForwardResult r = ForwardSolver(s).run();
    for (const auto& snap : r.trajectory.snapshots)
      for (double x : snap.values) CHECK(x == 0.0);
  }

  TEST_CASE("conservation and positivity on random networks") {
    std::mt19937_64 rng(21);
    for (int k = 0; k < 15; ++k) {
      const Scenario s = from_text(testsupport::random_network_text(rng));
      const ForwardResult r = ForwardSolver(s).run();
      CHECK(r.balance.relative_residual() <= 1e-8);
      CHECK(r.balance.clipped <= 1e-10 * r.balance.initial);
      for (const auto& snap : r.trajectory.snapshots)
        CHECK(*std::min_element(snap.values.begin(), snap.values.end()) >= 0.0);
    }
  }

  TEST_CASE("inflow at a source enters the network") {
    const Scenario s = from_text(merge_text("[inflow]\nV1 = 0:0.5, 0.5:0\n"));
    const ForwardResult r = ForwardSolver(s).run();
    CHECK(r.balance.inflow == doctest::Approx(0.25).epsilon(1e-3));
    CHECK(r.balance.relative_residual() <= 1e-8);
  }

  TEST_CASE("total variation does not grow on a free edge") {
    const Scenario s = from_text(free_edge);
    const ForwardResult r = ForwardSolver(s).run();
    const EdgeGrid& g = r.grid.edge(0);
    double prev = testsupport::total_variation(testsupport::edge_values(r.trajectory.snapshots.front(), g));
    for (const auto& snap : r.trajectory.snapshots) {
      const double tv = testsupport::total_variation(testsupport::edge_values(snap, g));
      CHECK(tv <= prev + 1e-12);
      prev = tv;
    }
  }

  TEST_CASE("first-order and limited solutions approach each other under refinement") {
    double previous = 1e9;
    for (double dx : {0.02, 0.01, 0.005}) {
      const Scenario a = from_text(smooth_edge(dx, "none"));
      const Scenario b = from_text(smooth_edge(dx, "superbee"));
      const ForwardResult ra = ForwardSolver(a).run(), rb = ForwardSolver(b).run();
      const EdgeGrid& g = ra.grid.edge(0);
      double l1 = 0.0;
      for (std::size_t i = 0; i < g.n_cells; ++i)
        l1 += std::abs(ra.trajectory.snapshots.back().values[i] - rb.trajectory.snapshots.back().values[i]) * g.dx;
      CHECK(l1 < previous);
      previous = l1;
    }
  }

  TEST_CASE("CFL violations and non-finite states are reported") {
    const Scenario s = from_text(free_edge);
    const ForwardSolver solver(s);
    const DensityField m = solver.initial_state();
    const VelocityField v = solver.velocity().evaluate(m, {});
    CHECK_THROWS_AS(advance_step(s.network, solver.grid(), m, v, s.matrix_p, s.inflow, 0.0, 0.02, solver.config()),
                    CflError);
    DensityField bad = m;
    bad.values[3] = std::nan("");
    CHECK_THROWS_AS(advance_step(s.network, solver.grid(), bad, v, s.matrix_p, s.inflow, 0.0, solver.times()[1],
                                 solver.config()),
                    SolverError);
    SolverConfig cfg;
    cfg.cfl = 1.5;
    CHECK_THROWS_AS(cfg.check(), ValidationError);
  }

  TEST_CASE("strided recording thins snapshots") {
    Scenario s = from_text(free_edge);
    SolverConfig cfg = SolverConfig::from(s);
    cfg.record_stride = 10;
    const ForwardSolver solver(s, cfg);
    const ForwardResult r = solver.run();
    CHECK(r.trajectory.times.back() == s.horizon);
    CHECK(r.trajectory.snapshots.size() < solver.times().size() / 5);
    CHECK(r.velocities.empty());
  }
}
