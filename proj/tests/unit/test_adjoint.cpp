#include <doctest.h>

#include <cmath>

#include "nltraffic/adjoint.hpp"
#include "nltraffic/errors.hpp"
#include "nltraffic/optimizer.hpp"
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

const char* merge_lights = R"([lights]
junction = V0
edges = e1, e2
radius = 0.125
u0 = 0
durations = 0.227, 0.251, 0.259, 0.3, 0.21
T_G = 0.15
T_R = 0.3
[initial]
e1 = [0.1, 0.15] + [0.4, 0.45]
e2 = [0.1, 0.15] + [0.6, 0.65]
)";

}  // namespace

TEST_SUITE("adjoint") {
  TEST_CASE("free block: cost is minus mass times horizon") {
    const Scenario s = from_text(free_edge);
    const ForwardSolver solver(s);
    const ForwardResult fwd = solver.run();
    const CostBreakdown c = evaluate_cost(s, fwd);
    CHECK(c.total == doctest::Approx(-0.1 * 0.5).epsilon(1e-12));
    CHECK(c.total_mass == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(c.mean_velocity() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.feedback_term == 0.0);
  }

  TEST_CASE("mean velocity of an empty network is undefined") {
    const Scenario s = from_text(merge_text(""));
    const ForwardSolver solver(s);
    const CostBreakdown c = evaluate_cost(s, solver.run());
    CHECK(c.total == 0.0);
    CHECK_THROWS_AS(c.mean_velocity(), RangeError);
  }

  TEST_CASE("feedback weights cover partial cells") {
    const Scenario s = from_text(std::string(free_edge) + "[feedback]\nweight = 2.0\nsegments = e1:0.105:0.2\n");
    const ForwardSolver solver(s);
    const auto w = feedback_weights(solver.grid(), *s.feedback);
    CHECK(w[9] == 0.0);
    CHECK(w[10] == doctest::Approx(1.0));
    CHECK(w[11] == doctest::Approx(2.0));
    CHECK(w[20] == 0.0);
    const CostBreakdown c = evaluate_cost(s, solver.run());
    CHECK(c.feedback_term != 0.0);
    CHECK(c.total == doctest::Approx(c.velocity_term + c.feedback_term));
  }

  TEST_CASE("free-edge multiplier is the remaining time away from the outlet") {
    const Scenario s = from_text(free_edge);
    const ForwardSolver solver(s);
    const ForwardResult fwd = solver.run();
    const AdjointField adj = solve_adjoint(solver, fwd);
    for (double x : adj.values.back().values) CHECK(x == 0.0);
    const double t0 = adj.times.front();
    CHECK(adj.values.front().values[20] == doctest::Approx(s.horizon - t0).epsilon(1e-12));
    CHECK(adj.values.front().values[99] < 0.05);
    const std::size_t mid = adj.times.size() / 2;
    CHECK(adj.values[mid].values[10] == doctest::Approx(s.horizon - adj.times[mid]).epsilon(1e-12));
  }

  TEST_CASE("adjoint needs the full history and a merge topology") {
    const Scenario s = from_text(free_edge);
    SolverConfig cfg = SolverConfig::from(s);
    cfg.record_stride = 4;
    const ForwardSolver strided(s, cfg);
    CHECK_THROWS_AS(solve_adjoint(strided, strided.run()), SolverError);

    const Scenario split = from_text(R"([network]
a = S -> V, 1.0
b = V -> T1, 1.0
c = V -> T2, 1.0
[grid]
T = 0.5
dx = 0.02
[matrixP]
a = b:0.5, c:0.5
)");
    const ForwardSolver solver(split);
    CHECK_THROWS_AS(solve_adjoint(solver, solver.run()), UnsupportedError);
  }

  TEST_CASE("duration gradient agrees with very small central differences") {
    const Scenario s = testsupport::load("gradcheck_local");
    const ForwardSolver solver(s);
    const auto rows = gradient_check(solver, *s.lights[0].schedule, 0.01);
    REQUIRE(rows.size() == 5);
    for (const auto& r : rows) {
      INFO("component " << r.component << " analytic " << r.analytic << " fd " << r.finite_diff);
      CHECK((r.rel_err <= 0.05 || std::abs(r.analytic - r.finite_diff) <= 1e-4));
    }
  }

  TEST_CASE("interpolated evaluation and transmission condition remain available") {
    const Scenario s = from_text(merge_text(merge_lights, 1.25, 0.02));
    const ForwardSolver solver(s);
    const SwitchSchedule sched = *s.lights[0].schedule;
    AdjointOptions opt;
    opt.evaluation = SwitchEvaluation::interpolated;
    opt.junction = JunctionCondition::transmission;
    const Evaluation a = evaluate_schedule(solver, sched, true, opt);
    const Evaluation b = evaluate_schedule(solver, sched, true);
    CHECK(a.cost.total == b.cost.total);
    CHECK(a.gradient.durations.size() == 5);
    for (double g : a.gradient.durations) CHECK(std::isfinite(g));
  }

  TEST_CASE("durations past the horizon are inert") {
    const Scenario s = from_text(merge_text(merge_lights, 1.25, 0.02));
    const ForwardSolver solver(s);
    SwitchSchedule sched = *s.lights[0].schedule;
    sched.durations = {0.3, 0.3, 0.3, 0.3, 0.3, 0.3};
    const Evaluation ev = evaluate_schedule(solver, sched);
    CHECK(ev.gradient.switches.size() == 4);
    CHECK(ev.gradient.durations[4] == 0.0);
    CHECK(ev.gradient.durations[5] == 0.0);
    CHECK_FALSE(ev.gradient.warnings.empty());
  }

  TEST_CASE("duration gradient is the tail sum of switch gradients") {
    const Scenario s = from_text(merge_text(merge_lights, 1.25, 0.02));
    const ForwardSolver solver(s);
    const Evaluation ev = evaluate_schedule(solver, *s.lights[0].schedule);
    const auto& g = ev.gradient;
    REQUIRE(g.switches.size() == 4);
    CHECK(g.durations[4] == 0.0);
    double tail = 0.0;
    for (std::size_t k = g.switches.size(); k-- > 0;) {
      tail += g.switches[k];
      CHECK(g.durations[k] == doctest::Approx(tail).epsilon(1e-12));
    }
  }
}
