#pragma once

// Differential-transformation (DT) predictor.
//
// Every state component x(t0 + dt) is represented by its power series
// sum_k x[k] dt^k. Applying the transformation rules
//   a*x(t) + b  ->  a*X[k] + b*delta[k]
//   x(t)^2      ->  sum_m X[m] X[k-m]
//   dx/dt       ->  (k+1) X[k+1]
// to the model turns the ODE into an explicit recursion from order k to
// order k+1. Long horizons are covered by chaining fixed-length windows,
// each re-expanded around the end state of the previous one.

#include <cstddef>
#include <span>
#include <vector>

#include "wtgswitch/model.hpp"
#include "wtgswitch/trajectory.hpp"

namespace wtgswitch {

struct WindowConfig {
  double window_len = 0.5;  // s
  int order_k = 30;
  double tail_tol = 1e-14;

  void validate() const;
};

// Power-series coefficients (orders 0..K) of every state component plus the
// per-turbine WTG power output, in natural (non-factorial-scaled) form.
class SeriesCoeffs {
 public:
  SeriesCoeffs(std::size_t n_turbines, int order);

  int order() const { return order_; }
  std::size_t length() const { return static_cast<std::size_t>(order_) + 1; }
  std::size_t dimension() const { return dimension_; }
  std::size_t turbine_count() const { return dimension_ - SystemState::kFirstRotor; }

  std::span<const double> component(std::size_t i) const;
  std::span<double> component(std::size_t i);
  std::span<const double> pgen(std::size_t turbine) const;
  std::span<double> pgen(std::size_t turbine);

  // Order-0 coefficients as a state.
  SystemState initial_state() const;

 private:
  int order_;
  std::size_t dimension_;
  std::vector<double> state_;  // dimension_ rows of length K+1
  std::vector<double> pgen_;   // turbine_count rows of length K+1
};

// Generic product rule: out[k] = sum_{m<=k} a[m] b[k-m]. Throws
// std::invalid_argument on length mismatch.
std::vector<double> convolve(std::span<const double> a, std::span<const double> b);

// Coefficients of orders 0..K from the initial state x0. Throws ConfigError
// on an infeasible closure and NumericalError naming the first order that
// produced a non-finite coefficient.
SeriesCoeffs dt_recursion(const SystemState& x0, const SystemParams& params,
                          const WtgModeCoeffs& mode, double dpd, int order_k);

// Horner evaluation of one coefficient row. Trailing terms whose magnitude
// |c[k]| dt^k is below tail_tol times the largest term are skipped.
double eval_polynomial(std::span<const double> coeffs, double dt, double tail_tol = 0.0);
// Analytic derivative of the polynomial at dt.
double eval_polynomial_derivative(std::span<const double> coeffs, double dt);

SystemState eval_series(const SeriesCoeffs& coeffs, double dt, double tail_tol = 0.0);
// Total WTG power from the per-turbine output series.
double eval_pgen_total(const SeriesCoeffs& coeffs, double dt, double tail_tol = 0.0);

// |d/dt series(dt) - rhs(series(dt))| for every component.
std::vector<double> series_residual(const SeriesCoeffs& coeffs, const SystemParams& params,
                                    const WtgModeCoeffs& mode, double dpd, double dt);

// Chain of windows covering [0, horizon]. Window j starts at starts[j] and
// has length lengths[j]; its order-0 coefficients are the end state of
// window j-1 evaluated at its full length.
struct WindowedSeries {
  std::vector<double> starts;
  std::vector<double> lengths;
  std::vector<SeriesCoeffs> windows;
  double tail_tol = 0.0;

  std::size_t window_index(double t) const;
  SystemState state_at(double t) const;
  double pgen_total_at(double t) const;
};

WindowedSeries propagate_windows(const SystemState& x0, const SystemParams& params,
                                 const WtgModeCoeffs& mode, double dpd, double horizon,
                                 const WindowConfig& wc);

// Samples the windowed series on sample_grid(horizon, sample_dt).
Trajectory predict_trajectory(const SystemState& x0, const SystemParams& params,
                              const WtgModeCoeffs& mode, double dpd, double horizon,
                              const WindowConfig& wc, double sample_dt);

}  // namespace wtgswitch
