#include <doctest.h>

#include "nltraffic/avfleet.hpp"
#include "nltraffic/errors.hpp"
#include "test_support.hpp"

using namespace nltraffic;
using testsupport::from_text;
using testsupport::merge_text;

namespace {

const char* drivers = R"([kernel]
type = cucker_smale
mu1 = 1.0
mu2 = 25.0
beta = 1.0
radius_cells = 5
[initial]
e1 = [0.1, 0.3]
e2 = [0.5, 0.6]
)";

std::string with_fleet(const std::string& fleet) { return merge_text(std::string(drivers) + "[fleet]\n" + fleet, 1.0, 0.02); }

}  // namespace

TEST_SUITE("avfleet") {
  TEST_CASE("an empty fleet leaves the drivers bit for bit unchanged") {
    const Scenario s = from_text(with_fleet("type = cucker_smale\nmu2 = 10\nradius_cells = 5\ncontrol = 0.7\n"));
    const ForwardSolver solver(s);
    const CoupledResult c = simulate_coupled(solver, LightControl::from_scenario(s));
    const ForwardResult plain = solver.run();
    REQUIRE(c.drivers.trajectory.snapshots.size() == plain.trajectory.snapshots.size());
    for (std::size_t n = 0; n < plain.trajectory.snapshots.size(); ++n)
      CHECK(c.drivers.trajectory.snapshots[n].values == plain.trajectory.snapshots[n].values);
    for (const auto& snap : c.fleet.snapshots)
      for (double x : snap.values) CHECK(x == 0.0);
  }

  TEST_CASE("a parked fleet does not move") {
    const Scenario s = from_text(with_fleet("initial.e1 = [0.4, 0.5] * 0.5\ncontrol = 0\n"));
    const CoupledResult c = simulate_coupled(s);
    for (const auto& snap : c.fleet.snapshots) CHECK(snap.values == c.fleet.snapshots.front().values);
    CHECK(c.fleet_balance.relative_residual() == 0.0);
  }

  TEST_CASE("a moving fleet conserves its mass and slows the drivers") {
    const Scenario s = from_text(with_fleet(
        "initial.e1 = [0.35, 0.4] * 0.5\ntype = cucker_smale\nmu2 = 10\nradius_cells = 5\ncontrol = 0.5\n"));
    const ForwardSolver solver(s);
    const CoupledResult c = simulate_coupled(solver, LightControl::from_scenario(s));
    CHECK(c.fleet_balance.initial == doctest::Approx(0.025));
    CHECK(c.fleet_balance.relative_residual() <= 1e-10);
    CHECK(c.drivers.balance.relative_residual() <= 1e-8);
    const ForwardResult plain = solver.run();
    const auto& a = c.drivers.trajectory.snapshots.back().values;
    const auto& b = plain.trajectory.snapshots.back().values;
    CHECK(a != b);
    CHECK(c.lipschitz.ok);
  }

  TEST_CASE("fleet control is a clipped product of space and time factors") {
    const Scenario s = from_text(with_fleet("control = 0.5\ncontrol.e3 = 0:2.0, 1:2.0\ncontrol_time = 0:1, 1:0\n"));
    const ForwardSolver solver(s);
    const FleetControl u(s, solver.grid());
    const std::size_t e3 = solver.grid().edge(s.network.edge_id("e3")).offset;
    CHECK(u.cells(0.0)[0] == doctest::Approx(0.5));
    CHECK(u.cells(0.0)[e3] == doctest::Approx(1.0));
    CHECK(u.cells(0.75)[e3] == doctest::Approx(0.5));
    CHECK(u.cells(0.75)[0] == doctest::Approx(0.125));
  }

  TEST_CASE("Lipschitz bound and missing fleet block") {
    const Scenario steep = from_text(with_fleet("control.e1 = 0:0, 0.5:0, 0.52:1, 1:1\nlipschitz = 2.0\n"));
    const ForwardSolver solver(steep);
    const LipschitzReport rep = check_fleet_lipschitz(steep, solver.grid(), solver.times());
    CHECK_FALSE(rep.ok);
    CHECK(rep.space_slope > 2.2);
    CHECK_THROWS_AS(simulate_coupled(steep), ValidationError);
    CHECK_THROWS_AS(simulate_coupled(from_text(merge_text(drivers))), ValidationError);
  }

  TEST_CASE("bundled fleet scenario") {
    const CoupledResult c = simulate_coupled(testsupport::load("fleet_demo"));
    CHECK(c.fleet_balance.relative_residual() <= 1e-10);
    for (const auto& snap : c.fleet.snapshots)
      CHECK(*std::min_element(snap.values.begin(), snap.values.end()) >= 0.0);
  }
}
