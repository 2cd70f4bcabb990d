#include <doctest.h>

#include <cmath>
#include <random>

#include "nltraffic/control.hpp"
#include "nltraffic/errors.hpp"

using namespace nltraffic;

namespace {

SwitchSchedule schedule(int u0, std::vector<double> s) {
  SwitchSchedule out;
  out.u0 = u0;
  out.durations = std::move(s);
  out.t_green = 0.15;
  out.t_red = 0.3;
  return out;
}

}  // namespace

TEST_SUITE("control") {
  TEST_CASE("single switch reconstructs an indicator of [0, tau)") {
    const double horizon = 1.25, tau = 0.4;
    const StepSignal u = reconstruct_control(schedule(1, {tau, horizon - tau}), horizon);
    CHECK(u.at(0.0) == 1);
    CHECK(u.at(0.3999) == 1);
    CHECK(u.at(tau) == 0);
    CHECK(u.at(horizon) == 0);
    REQUIRE(u.breaks().size() == 1);
    CHECK(u.breaks()[0] == tau);
  }

  TEST_CASE("three phases starting green") {
    const StepSignal u = reconstruct_control(schedule(0, {0.3, 0.3, 0.4}), 1.0);
    CHECK(u.at(0.1) == 0);
    CHECK(u.at(0.3) == 1);
    CHECK(u.at(0.59) == 1);
    CHECK(u.at(0.6) == 0);
    CHECK(u.at(1.0) == 0);
    CHECK(u.average(0.2, 0.4) == doctest::Approx(0.5));
  }

  TEST_CASE("published optimum switch times") {
    const SwitchSchedule s = schedule(0, {0.227, 0.251, 0.259, 0.3, 0.21});
    const auto tau = s.cumulative_times();
    const std::vector<double> expected{0.227, 0.478, 0.737, 1.037, 1.247};
    for (std::size_t i = 0; i < tau.size(); ++i) CHECK(tau[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    CHECK(s.switch_count(1.25) == 4);
    const StepSignal u = reconstruct_control(s, 1.25);
    CHECK(u.at(0.9) == 1);
    CHECK(u.at(1.248) == 0);
  }

  TEST_CASE("short schedules hold their last state") {
    const StepSignal u = reconstruct_control(schedule(1, {0.2, 0.2}), 1.0);
    CHECK(u.at(0.9) == 0);
    CHECK(u.breaks().size() == 1);
  }

  TEST_CASE("invalid schedules are rejected") {
    CHECK_THROWS_AS(reconstruct_control(schedule(0, {0.2, 0.0}), 1.0), ValidationError);
    CHECK_THROWS_AS(reconstruct_control(schedule(0, {0.2, -0.1}), 1.0), ValidationError);
    CHECK_THROWS_AS(reconstruct_control(schedule(2, {0.2}), 1.0), ValidationError);
  }

  TEST_CASE("projection onto the box") {
    CHECK(project_durations({0.1, 0.2, 0.5}, 0.15, 0.3) == std::vector<double>{0.15, 0.2, 0.3});
    CHECK(project_durations({0.16, 0.29}, 0.15, 0.3) == std::vector<double>{0.16, 0.29});
    CHECK(project_durations({-1.0, 10.0}, 0.15, 0.3) == std::vector<double>{0.15, 0.3});
    CHECK_THROWS_AS(project_durations({0.2}, 0.3, 0.3), ValidationError);
    CHECK_THROWS_AS(project_durations({0.2}, 0.4, 0.3), ValidationError);
  }

  TEST_CASE("projection is idempotent and non-expansive") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> law(-1.0, 1.0);
    for (int k = 0; k < 200; ++k) {
      std::vector<double> a(6), b(6);
      for (auto& x : a) x = law(rng);
      for (auto& x : b) x = law(rng);
      const auto pa = project_durations(a, 0.15, 0.3);
      const auto pb = project_durations(b, 0.15, 0.3);
      CHECK(project_durations(pa, 0.15, 0.3) == pa);
      for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(pa[i] - pb[i]) <= std::abs(a[i] - b[i]));
        CHECK(pa[i] >= 0.15);
        CHECK(pa[i] <= 0.3);
      }
    }
  }

  TEST_CASE("feasible schedules have bounded switch counts") {
    std::mt19937_64 rng(5);
    const double horizon = 1.25, tg = 0.15, tr = 0.3;
    std::uniform_real_distribution<double> law(tg, std::nextafter(tr, 0.0));
    for (int k = 0; k < 200; ++k) {
      SwitchSchedule s = schedule(static_cast<int>(rng() % 2), {});
      double total = 0.0;
      while (total < horizon) {
        s.durations.push_back(law(rng));
        total += s.durations.back();
      }
      const double n = static_cast<double>(s.switch_count(horizon));
      CHECK(n <= horizon / tg + 1.0);
      CHECK(n >= horizon / tr - 1.0);
    }
  }

  TEST_CASE("signal breakpoints give back the durations") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> law(0.15, 0.3);
    for (int k = 0; k < 50; ++k) {
      SwitchSchedule s = schedule(0, {});
      double total = 0.0;
      while (total < 1.0) {
        s.durations.push_back(law(rng));
        total += s.durations.back();
      }
      const StepSignal u = reconstruct_control(s, 1.0);
      const auto tau = s.cumulative_times();
      REQUIRE(u.breaks().size() == s.durations.size() - 1);
      double prev = 0.0;
      for (std::size_t i = 0; i < u.breaks().size(); ++i) {
        CHECK(u.breaks()[i] - prev == doctest::Approx(s.durations[i]));
        prev = u.breaks()[i];
        CHECK(u.values()[i + 1] == 1 - u.values()[i]);
      }
    }
  }

  TEST_CASE("two-edge junction gets the complementary signal") {
    const StepSignal u1 = reconstruct_control(schedule(1, {0.4, 0.85}), 1.25);
    const auto both = junction_signal_complement({u1}, 2);
    REQUIRE(both.size() == 2);
    for (double t : {0.0, 0.2, 0.4, 0.9, 1.25}) CHECK(both[1].at(t) == 1 - u1.at(t));
  }

  TEST_CASE("three-edge junction needs exactly one green edge") {
    const double horizon = 1.0;
    const auto ok = junction_signal_complement(
        {StepSignal::constant(1, horizon), StepSignal::constant(1, horizon), StepSignal::constant(0, horizon)}, 3);
    CHECK(ok.size() == 3);
    const StepSignal a({0.5}, {1, 0}, horizon);
    const StepSignal b = StepSignal::constant(0, horizon);
    const StepSignal c = StepSignal::constant(1, horizon);
    CHECK_THROWS_WITH_AS(junction_signal_complement({a, b, c}, 3), doctest::Contains("[0.5, 1)"), ValidationError);
    CHECK_THROWS_AS(junction_signal_complement({a, b}, 3), ValidationError);
  }

  TEST_CASE("phase signals rotate over the lighted edges") {
    const auto two = phase_signals(schedule(0, {0.5, 0.5}), 2, 1.0);
    CHECK(two[0].at(0.1) == 0);
    CHECK(two[1].at(0.1) == 1);
    CHECK(two[0].at(0.6) == 1);
    const auto three = phase_signals(schedule(0, {0.3, 0.3, 0.4}), 3, 1.0);
    for (double t : {0.1, 0.4, 0.8}) {
      int green = 0;
      for (const auto& s : three) green += s.at(t) == 0;
      CHECK(green == 1);
    }
    CHECK(three[2].at(0.8) == 0);
  }

  TEST_CASE("asymmetric phase rule") {
    CHECK(asymmetric_phase_violations(schedule(0, {0.2, 0.25, 0.2}), 0.65).empty());
    CHECK_FALSE(asymmetric_phase_violations(schedule(0, {0.2, 0.35, 0.2}), 0.75).empty());
    CHECK_FALSE(asymmetric_phase_violations(schedule(0, {0.1, 0.25}), 0.35).empty());
  }
}
