#include <doctest.h>

#include <cmath>
#include <limits>

#include "linear_oracle.hpp"
#include "wtgswitch/errors.hpp"
#include "wtgswitch/reference_integrator.hpp"

using namespace wtgswitch;

namespace {

const SystemParams kParams = case_study_params();
const ModePair kModes = case_study_modes(5);
constexpr double kSafeDpd = 500.0 / 6000.0;
constexpr double kUnsafeDpd = 1000.0 / 6000.0;
const IntegratorConfig kDefault{1e-3, 20.0, 1e-2};

}  // namespace

TEST_CASE("zero disturbance stays at the origin") {
  for (const auto* mode : {&kModes.mppt, &kModes.support}) {
    const auto traj = integrate_fixed(SystemState(5), kParams, *mode, 0.0, kDefault);
    CHECK(traj.size() == 2001);
    for (const auto& s : traj.states) {
      for (std::size_t i = 0; i < s.dimension(); ++i) CHECK(s[i] == 0.0);
    }
    for (double p : traj.pgen_total) CHECK(p == 0.0);
    CHECK(traj.events.empty());
  }
}

TEST_CASE("RK4 against the exact linear solution") {
  for (double dpd : {kSafeDpd, kUnsafeDpd}) {
    for (const auto* mode : {&kModes.mppt, &kModes.support}) {
      const auto traj = integrate_fixed(SystemState(5), kParams, *mode, dpd, kDefault);
      const auto exact = oracle::dw_on_grid(oracle::assemble(kParams, *mode, dpd),
                                            Eigen::VectorXd::Zero(8), 0.01, traj.size());
      double worst = 0.0;
      for (std::size_t j = 0; j < traj.size(); ++j) {
        worst = std::max(worst, std::abs(traj.states[j].dw() - exact[j]));
      }
      CHECK(worst <= 1e-8);
    }
  }
}

TEST_CASE("long run settles at the analytic equilibrium") {
  const IntegratorConfig cfg{1e-3, 200.0, 1e-2};
  for (double dpd : {kSafeDpd, kUnsafeDpd}) {
    const auto traj = integrate_fixed(SystemState(5), kParams, kModes.mppt, dpd, cfg);
    CHECK(traj.times.back() == doctest::Approx(200.0));
    CHECK(std::abs(traj.states.back().dw() - steady_state_deviation(kParams, dpd)) <= 1e-4);
  }
}

TEST_CASE("fourth-order self convergence") {
  auto nadir_at = [](double step) {
    const IntegratorConfig cfg{step, 20.0, 0.04};
    return nadir(integrate_fixed(SystemState(5), kParams, kModes.support, kUnsafeDpd, cfg)).dw;
  };
  CHECK(std::abs(nadir_at(1e-3) - nadir_at(5e-4)) <= 1e-9);

  // Global error at a fixed instant shrinks ~16x per step halving.
  const double exact = oracle::solve(oracle::assemble(kParams, kModes.support, kUnsafeDpd),
                                     Eigen::VectorXd::Zero(8), 0.8)(0);
  auto error_at = [&](double step) {
    const IntegratorConfig cfg{step, 0.8, 0.8};
    const auto traj = integrate_fixed(SystemState(5), kParams, kModes.support, kUnsafeDpd, cfg);
    return std::abs(traj.states.back().dw() - exact);
  };
  CHECK(error_at(0.04) / error_at(0.02) == doctest::Approx(16.0).epsilon(0.15));
  CHECK(error_at(0.02) / error_at(0.01) == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("nadir") {
  Trajectory t;
  t.push_back(0.0, SystemState::from_values({0, 0, 0}), 0.0, OperatingMode::Mppt);
  t.push_back(1.0, SystemState::from_values({-0.3, 0, 0}), 0.0, OperatingMode::Mppt);
  t.push_back(2.0, SystemState::from_values({-0.2, 0, 0}), 0.0, OperatingMode::Mppt);
  const auto n = nadir(t);
  CHECK(n.time == 1.0);
  CHECK(n.dw == -0.3);
  CHECK(n.drop() == 0.3);

  const auto zero = integrate_fixed(SystemState(5), kParams, kModes.mppt, 0.0, kDefault);
  CHECK(nadir(zero).time == 0.0);
  CHECK(nadir(zero).dw == 0.0);

  CHECK_THROWS_AS(nadir(Trajectory{}), std::invalid_argument);

  const auto unsafe = integrate_fixed(SystemState(5), kParams, kModes.mppt, kUnsafeDpd, kDefault);
  CHECK(nadir(unsafe).drop() > 0.5);
}

TEST_CASE("closed loop with a deadband") {
  const auto traj = simulate_closed_loop(SystemState(5), kParams, kModes, kSafeDpd,
                                         SwitchOnDrop{0.2}, kDefault);
  REQUIRE(traj.events.size() == 1);
  const auto& ev = traj.events.front();
  CHECK(ev.from == OperatingMode::Mppt);
  CHECK(ev.to == OperatingMode::Support);
  CHECK(ev.state.dw() <= -0.2);

  SUBCASE("crossing time matches the exact MPPT solution") {
    const auto sys = oracle::assemble(kParams, kModes.mppt, kSafeDpd);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(8);
    double lo = 0.0;
    double hi = 1.0;
    for (int i = 0; i < 60; ++i) {
      const double mid = 0.5 * (lo + hi);
      (oracle::solve(sys, x0, mid)(0) <= -0.2 ? hi : lo) = mid;
    }
    CHECK(std::abs(ev.time - hi) <= 2e-6);
    // State at the switch equals the MPPT solution there.
    const auto exact = oracle::solve(sys, x0, ev.time);
    for (std::size_t i = 0; i < ev.state.dimension(); ++i) {
      CHECK(std::abs(ev.state[i] - exact(static_cast<int>(i))) <= 1e-9);
    }
  }

  SUBCASE("before the switch the run equals open-loop MPPT") {
    const auto open = integrate_fixed(SystemState(5), kParams, kModes.mppt, kSafeDpd, kDefault);
    for (std::size_t j = 0; j < traj.size() && traj.times[j] < ev.time; ++j) {
      CHECK(traj.states[j] == open.states[j]);
      CHECK(traj.modes[j] == OperatingMode::Mppt);
    }
    for (std::size_t j = 0; j < traj.size(); ++j) {
      if (traj.times[j] > ev.time) CHECK(traj.modes[j] == OperatingMode::Support);
    }
  }

  SUBCASE("after the switch the run follows the exact support solution") {
    const auto sys = oracle::assemble(kParams, kModes.support, kSafeDpd);
    const auto x_ev = oracle::to_vector(ev.state);
    for (std::size_t j = 0; j < traj.size(); ++j) {
      if (traj.times[j] <= ev.time || traj.times[j] > 3.0) continue;
      const double exact = oracle::solve(sys, x_ev, traj.times[j] - ev.time)(0);
      CHECK(std::abs(traj.states[j].dw() - exact) <= 1e-9);
    }
  }
}

TEST_CASE("never-triggering strategies reproduce open-loop MPPT exactly") {
  const auto open = integrate_fixed(SystemState(5), kParams, kModes.mppt, kUnsafeDpd, kDefault);
  const SwitchPolicy never[] = {NeverSwitch{},
                                SwitchOnDrop{std::numeric_limits<double>::infinity()},
                                SwitchOnDrop{10.0}, SwitchAtTime{1e6}};
  for (const auto& policy : never) {
    const auto closed = simulate_closed_loop(SystemState(5), kParams, kModes, kUnsafeDpd, policy, kDefault);
    CHECK(closed.events.empty());
    REQUIRE(closed.size() == open.size());
    for (std::size_t j = 0; j < open.size(); ++j) {
      CHECK(closed.times[j] == open.times[j]);
      CHECK(closed.states[j] == open.states[j]);
      CHECK(closed.pgen_total[j] == open.pgen_total[j]);
    }
  }
}

TEST_CASE("scheduled switch") {
  SUBCASE("at detection equals open-loop support") {
    const auto closed = simulate_closed_loop(SystemState(5), kParams, kModes, kUnsafeDpd,
                                             SwitchAtTime{0.0}, kDefault);
    const auto open = integrate_fixed(SystemState(5), kParams, kModes.support, kUnsafeDpd, kDefault);
    REQUIRE(closed.events.size() == 1);
    CHECK(closed.events.front().time == 0.0);
    for (std::size_t j = 0; j < open.size(); ++j) {
      CHECK(closed.states[j] == open.states[j]);
      CHECK(closed.modes[j] == OperatingMode::Support);
    }
  }
  SUBCASE("mid-step switch lands on the requested time") {
    const auto closed = simulate_closed_loop(SystemState(5), kParams, kModes, kUnsafeDpd,
                                             SwitchAtTime{0.1234567}, kDefault);
    REQUIRE(closed.events.size() == 1);
    CHECK(closed.events.front().time == 0.1234567);
    const auto exact = oracle::solve(oracle::assemble(kParams, kModes.mppt, kUnsafeDpd),
                                     Eigen::VectorXd::Zero(8), 0.1234567);
    CHECK(std::abs(closed.events.front().state.dw() - exact(0)) <= 1e-10);
  }
}

TEST_CASE("support at detection reduces the nadir drop") {
  for (double dpd : {kSafeDpd, kUnsafeDpd}) {
    const auto mppt = integrate_fixed(SystemState(5), kParams, kModes.mppt, dpd, kDefault);
    const auto support = simulate_closed_loop(SystemState(5), kParams, kModes, dpd,
                                              SwitchAtTime{0.0}, kDefault);
    CHECK(nadir(support).drop() < nadir(mppt).drop());
  }
}

TEST_CASE("WTG power jumps through the feed-through at the switch") {
  const auto traj = simulate_closed_loop(SystemState(5), kParams, kModes, kSafeDpd,
                                         SwitchOnDrop{0.2}, kDefault);
  const auto& ev = traj.events.front();
  const auto mppt_pgen = wtg_power_output(ev.state, rhs(ev.state, kParams, kModes.mppt, kSafeDpd).dw(),
                                          kModes.mppt);
  const auto support_pgen = wtg_power_output(
      ev.state, rhs(ev.state, kParams, kModes.support, kSafeDpd).dw(), kModes.support);
  CHECK(support_pgen > mppt_pgen);
}

TEST_CASE("configuration and numerical errors") {
  CHECK_THROWS_AS((IntegratorConfig{0.0, 20.0, 0.01}.validate()), ConfigError);
  CHECK_THROWS_AS((IntegratorConfig{0.02, 20.0, 0.01}.validate()), ConfigError);
  CHECK_THROWS_AS((IntegratorConfig{1e-3, 0.005, 0.01}.validate()), ConfigError);
  CHECK_THROWS_AS(simulate_closed_loop(SystemState(5), kParams, kModes, kSafeDpd,
                                       SwitchOnDrop{-0.1}, kDefault),
                  ConfigError);

  SystemParams stiff = kParams;
  stiff.tau_g = 1e-6;  // far beyond the RK4 stability region at 1 ms
  try {
    integrate_fixed(SystemState(5), stiff, kModes.mppt, kSafeDpd, kDefault);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("t = ") != std::string::npos);
  }
}
