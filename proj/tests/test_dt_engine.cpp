#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "linear_oracle.hpp"
#include "wtgswitch/dt_engine.hpp"
#include "wtgswitch/errors.hpp"

using namespace wtgswitch;

namespace {

const SystemParams kParams = case_study_params();
const ModePair kModes = case_study_modes(5);
constexpr double kSafeDpd = 500.0 / 6000.0;
constexpr double kUnsafeDpd = 1000.0 / 6000.0;

SystemState row(const SeriesCoeffs& c, std::size_t k) {
  SystemState s(c.turbine_count());
  for (std::size_t i = 0; i < c.dimension(); ++i) s[i] = c.component(i)[k];
  return s;
}

}  // namespace

TEST_CASE("zero input gives identically zero coefficients") {
  for (int order : {1, 30, 200}) {
    for (const auto* mode : {&kModes.mppt, &kModes.support}) {
      const auto c = dt_recursion(SystemState(5), kParams, *mode, 0.0, order);
      CHECK(c.order() == order);
      for (std::size_t i = 0; i < c.dimension(); ++i) {
        CHECK(c.component(i).size() == c.length());
        for (double v : c.component(i)) CHECK(v == 0.0);
      }
      for (std::size_t t = 0; t < c.turbine_count(); ++t) {
        for (double v : c.pgen(t)) CHECK(v == 0.0);
      }
    }
  }
}

TEST_CASE("first-order coefficients") {
  SUBCASE("MPPT") {
    const auto c = dt_recursion(SystemState(5), kParams, kModes.mppt, 0.1, 30);
    CHECK(c.component(SystemState::kFrequency)[1] == doctest::Approx(-0.75).epsilon(1e-14));
    CHECK(c.component(SystemState::kMechanical)[1] == 0.0);
    CHECK(c.component(SystemState::kValve)[1] == 0.0);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(c.component(SystemState::kFirstRotor + i)[1] == 0.0);
      CHECK(c.pgen(i)[0] == 0.0);
    }
    // Second order: only the governor reacts, dpv[1] = 0 so dw[2] = 0 and
    // dpv[2] = -droop * dw[1] / tau_g / 2.
    CHECK(c.component(SystemState::kFrequency)[2] ==
          doctest::Approx(-kParams.D / kParams.omega_s * kParams.swing_gain() * -0.75 / 2.0));
    CHECK(c.component(SystemState::kValve)[2] ==
          doctest::Approx(-(1.0 / 3.0) * -0.75 / 0.1 / 2.0).epsilon(1e-14));
  }
  SUBCASE("support") {
    const auto c = dt_recursion(SystemState(5), kParams, kModes.support, 0.1, 30);
    const double dw1 = c.component(SystemState::kFrequency)[1];
    CHECK(dw1 == doctest::Approx(-0.1578947).epsilon(1e-6));
    CHECK(dw1 == doctest::Approx(rhs(SystemState(5), kParams, kModes.support, 0.1).dw()).epsilon(1e-14));
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(c.pgen(i)[0] == doctest::Approx(0.01578947).epsilon(1e-6));
      CHECK(c.pgen(i)[0] == doctest::Approx(-0.10 * dw1).epsilon(1e-14));
    }
  }
}

TEST_CASE("each order satisfies the derivative rule against the model rhs") {
  // (k+1) X[k+1] equals the order-k coefficient of rhs(x), and since the model
  // is linear that is rhs(X[k]) with the step input only at k = 0.
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (const auto* mode : {&kModes.mppt, &kModes.support}) {
    SystemState x0(5);
    for (std::size_t i = 0; i < x0.dimension(); ++i) x0[i] = u(rng);
    const auto c = dt_recursion(x0, kParams, *mode, kUnsafeDpd, 25);
    CHECK(row(c, 0) == x0);
    for (std::size_t k = 0; k < 25; ++k) {
      const auto f = rhs(row(c, k), kParams, *mode, k == 0 ? kUnsafeDpd : 0.0);
      const auto next = row(c, k + 1);
      for (std::size_t i = 0; i < c.dimension(); ++i) {
        CHECK(static_cast<double>(k + 1) * next[i] ==
              doctest::Approx(f[i]).epsilon(1e-12).scale(1e-300));
      }
      const double pgen = wtg_power_output(row(c, k), f.dw(), *mode);
      double pgen_sum = 0.0;
      for (std::size_t t = 0; t < 5; ++t) pgen_sum += c.pgen(t)[k];
      CHECK(pgen_sum == doctest::Approx(pgen).epsilon(1e-12).scale(1e-300));
    }
  }
}

TEST_CASE("polynomial evaluation") {
  const std::vector<double> c{1.0, 2.0, 3.0};
  CHECK(eval_polynomial(c, 2.0) == 17.0);
  CHECK(eval_polynomial(c, 2.0, 1e-14) == 17.0);
  CHECK(eval_polynomial(c, 0.0) == 1.0);
  CHECK(eval_polynomial_derivative(c, 2.0) == 14.0);
  CHECK(eval_polynomial(std::vector<double>{}, 1.0) == 0.0);

  SUBCASE("tail truncation only drops negligible terms") {
    const auto s = dt_recursion(SystemState(5), kParams, kModes.support, kUnsafeDpd, 200);
    for (double dt : {0.0, 0.1, 0.5, 1.0}) {
      for (std::size_t i = 0; i < s.dimension(); ++i) {
        const auto c = s.component(i);
        double magnitude = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) magnitude += std::abs(c[k]) * std::pow(dt, k);
        const double full = eval_polynomial(c, dt);
        const double cut = eval_polynomial(c, dt, 1e-14);
        CHECK(std::abs(full - cut) <= 1e-13 * magnitude);
      }
    }
  }
}

TEST_CASE("eval_series at zero returns the initial state exactly") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    SystemState x0(5);
    for (std::size_t i = 0; i < x0.dimension(); ++i) x0[i] = u(rng);
    for (const auto* mode : {&kModes.mppt, &kModes.support}) {
      const auto c = dt_recursion(x0, kParams, *mode, u(rng), 30);
      CHECK(eval_series(c, 0.0) == x0);
      CHECK(eval_series(c, 0.0, 1e-14) == x0);
    }
  }
}

TEST_CASE("short-step consistency with a forward Euler step") {
  // The gap to x0 + rhs(x0) dt is second order: below 2 dt^2 at dt = 1e-3 and
  // shrinking fourfold per halving.
  const auto c = dt_recursion(SystemState(5), kParams, kModes.mppt, kSafeDpd, 30);
  const auto f = rhs(SystemState(5), kParams, kModes.mppt, kSafeDpd);
  auto gap = [&](double dt) {
    const auto x = eval_series(c, dt);
    double worst = 0.0;
    for (std::size_t i = 0; i < x.dimension(); ++i) worst = std::max(worst, std::abs(x[i] - dt * f[i]));
    return worst;
  };
  CHECK(gap(1e-3) <= 2e-6);
  CHECK(gap(1e-3) / gap(5e-4) == doctest::Approx(4.0).epsilon(0.01));
}

TEST_CASE("convolve") {
  CHECK(convolve(std::vector<double>{1, 1, 0}, std::vector<double>{1, 1, 0}) ==
        std::vector<double>{1, 2, 1});
  CHECK(convolve(std::vector<double>{0, 1, 0, 0}, std::vector<double>{0, 0, 1, 0}) ==
        std::vector<double>{0, 0, 0, 1});
  const std::vector<double> b{0.5, -1.0, 2.0, 4.0};
  const auto scaled = convolve(std::vector<double>{3.0, 0, 0, 0}, b);
  for (std::size_t k = 0; k < b.size(); ++k) CHECK(scaled[k] == 3.0 * b[k]);
  CHECK_THROWS_AS(convolve(std::vector<double>{1, 2}, std::vector<double>{1}),
                  std::invalid_argument);

  SUBCASE("product of truncated series matches pointwise product to truncation order") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1, 1);
    std::vector<double> p(6), q(6);
    for (auto& v : p) v = u(rng);
    for (auto& v : q) v = u(rng);
    // Zero-pad so nothing is truncated: degree 5 * degree 5 fits in 11 terms.
    p.resize(11, 0.0);
    q.resize(11, 0.0);
    const auto pq = convolve(p, q);
    for (double t : {-0.7, 0.3, 1.1}) {
      CHECK(eval_polynomial(pq, t) ==
            doctest::Approx(eval_polynomial(p, t) * eval_polynomial(q, t)).epsilon(1e-12));
    }
  }
}

TEST_CASE("series residual") {
  const auto zero = dt_recursion(SystemState(5), kParams, kModes.mppt, 0.0, 30);
  for (double r : series_residual(zero, kParams, kModes.mppt, 0.0, 0.25)) CHECK(r == 0.0);

  const auto k30 = dt_recursion(SystemState(5), kParams, kModes.mppt, kSafeDpd, 30);
  const auto k2 = dt_recursion(SystemState(5), kParams, kModes.mppt, kSafeDpd, 2);
  const auto r30 = series_residual(k30, kParams, kModes.mppt, kSafeDpd, 0.25);
  const auto r2 = series_residual(k2, kParams, kModes.mppt, kSafeDpd, 0.25);
  double max30 = 0.0;
  double max2 = 0.0;
  for (double r : r30) {
    CHECK(r <= 1e-8);
    max30 = std::max(max30, r);
  }
  for (double r : r2) max2 = std::max(max2, r);
  CHECK(max2 > max30);
}

TEST_CASE("windowed prediction against the exact linear solution") {
  const WindowConfig wc{0.5, 30, 1e-14};
  for (double dpd : {kSafeDpd, kUnsafeDpd}) {
    for (const auto* mode : {&kModes.mppt, &kModes.support}) {
      const auto traj = predict_trajectory(SystemState(5), kParams, *mode, dpd, 20.0, wc, 0.01);
      REQUIRE(traj.size() == 2001);
      const auto sys = oracle::assemble(kParams, *mode, dpd);
      const auto exact = oracle::dw_on_grid(sys, Eigen::VectorXd::Zero(8), 0.01, traj.size());
      double worst = 0.0;
      for (std::size_t j = 0; j < traj.size(); ++j) {
        worst = std::max(worst, std::abs(traj.states[j].dw() - exact[j]));
      }
      CHECK(worst <= 1e-9);
      for (auto m : traj.modes) CHECK(m == mode->mode);
    }
  }
}

TEST_CASE("single high-order window agrees with chained windows") {
  const auto single = propagate_windows(SystemState(5), kParams, kModes.mppt, kUnsafeDpd, 1.0,
                                        WindowConfig{1.0, 200, 1e-14});
  const auto chained = propagate_windows(SystemState(5), kParams, kModes.mppt, kUnsafeDpd, 1.0,
                                         WindowConfig{0.5, 30, 1e-14});
  REQUIRE(single.windows.size() == 1);
  REQUIRE(chained.windows.size() == 2);
  for (int j = 0; j <= 100; ++j) {
    const double t = 0.01 * j;
    CHECK(std::abs(single.state_at(t).dw() - chained.state_at(t).dw()) <= 1e-8);
  }
}

TEST_CASE("window handoff is continuous") {
  const WindowConfig wc{0.5, 30, 1e-14};
  const auto ws = propagate_windows(SystemState(5), kParams, kModes.support, kUnsafeDpd, 20.0, wc);
  REQUIRE(ws.windows.size() == 40);
  for (std::size_t j = 1; j < ws.windows.size(); ++j) {
    const auto end = eval_series(ws.windows[j - 1], ws.lengths[j - 1], wc.tail_tol);
    const auto begin = eval_series(ws.windows[j], 0.0);
    for (std::size_t i = 0; i < end.dimension(); ++i) CHECK(std::abs(end[i] - begin[i]) <= 1e-12);
    CHECK(ws.window_index(ws.starts[j]) == j);
  }
}

TEST_CASE("short last window and off-grid horizon") {
  const WindowConfig wc{0.5, 30, 1e-14};
  const auto ws = propagate_windows(SystemState(5), kParams, kModes.mppt, kSafeDpd, 1.2, wc);
  REQUIRE(ws.windows.size() == 3);
  CHECK(ws.lengths.back() == doctest::Approx(0.2));
  const auto traj = predict_trajectory(SystemState(5), kParams, kModes.mppt, kSafeDpd, 1.205, wc, 0.01);
  CHECK(traj.times.back() == doctest::Approx(1.205));
  for (std::size_t j = 1; j < traj.size(); ++j) CHECK(traj.times[j] > traj.times[j - 1]);
}

TEST_CASE("prediction is linear in the disturbance") {
  const WindowConfig wc{0.5, 30, 1e-14};
  for (const auto* mode : {&kModes.mppt, &kModes.support}) {
    const auto a = predict_trajectory(SystemState(5), kParams, *mode, kSafeDpd, 20.0, wc, 0.01);
    const auto b = predict_trajectory(SystemState(5), kParams, *mode, 2.0 * kSafeDpd, 20.0, wc, 0.01);
    for (std::size_t j = 0; j < a.size(); ++j) {
      for (std::size_t i = 0; i < a.states[j].dimension(); ++i) {
        const double expected = 2.0 * a.states[j][i];
        CHECK(std::abs(b.states[j][i] - expected) <= 1e-9 * std::max(1e-12, std::abs(expected)));
      }
    }
  }
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(dt_recursion(SystemState(5), kParams, kModes.mppt, 0.1, 0), ConfigError);
  CHECK_THROWS_AS(dt_recursion(SystemState(4), kParams, kModes.mppt, 0.1, 5), ConfigError);
  CHECK_THROWS_AS((WindowConfig{0.0, 30, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((WindowConfig{0.5, 0, 0.0}.validate()), ConfigError);
  CHECK_THROWS_AS((WindowConfig{0.5, 30, -1.0}.validate()), ConfigError);

  SUBCASE("overflow reports the order") {
    SystemParams p = kParams;
    p.tau_g = 1e-300;
    try {
      dt_recursion(SystemState(5), p, kModes.mppt, 0.1, 30);
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("order") != std::string::npos);
    }
    try {
      propagate_windows(SystemState(5), p, kModes.mppt, 0.1, 1.0, WindowConfig{});
      FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
      CHECK(std::string(e.what()).find("window 0") != std::string::npos);
    }
  }
}
