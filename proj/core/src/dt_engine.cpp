#include "wtgswitch/dt_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "wtgswitch/errors.hpp"

namespace wtgswitch {

void WindowConfig::validate() const {
  if (!(std::isfinite(window_len) && window_len > 0.0)) {
    throw ConfigError("window.window_len must be > 0");
  }
  if (order_k < 1) throw ConfigError("window.order_k must be >= 1");
  if (!(std::isfinite(tail_tol) && tail_tol >= 0.0)) {
    throw ConfigError("window.tail_tol must be >= 0");
  }
}

SeriesCoeffs::SeriesCoeffs(std::size_t n_turbines, int order)
    : order_(order), dimension_(SystemState::kFirstRotor + n_turbines) {
  if (order < 0) throw std::invalid_argument("series order must be >= 0");
  state_.assign(dimension_ * length(), 0.0);
  pgen_.assign(n_turbines * length(), 0.0);
}

std::span<const double> SeriesCoeffs::component(std::size_t i) const {
  return std::span<const double>(state_).subspan(i * length(), length());
}

std::span<double> SeriesCoeffs::component(std::size_t i) {
  return std::span<double>(state_).subspan(i * length(), length());
}

std::span<const double> SeriesCoeffs::pgen(std::size_t turbine) const {
  return std::span<const double>(pgen_).subspan(turbine * length(), length());
}

std::span<double> SeriesCoeffs::pgen(std::size_t turbine) {
  return std::span<double>(pgen_).subspan(turbine * length(), length());
}

SystemState SeriesCoeffs::initial_state() const {
  SystemState s(turbine_count());
  for (std::size_t i = 0; i < dimension_; ++i) s[i] = component(i)[0];
  return s;
}

std::vector<double> convolve(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("convolve: coefficient arrays differ in length (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) +
                                ")");
  }
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t k = 0; k < a.size(); ++k) {
    double s = 0.0;
    for (std::size_t m = 0; m <= k; ++m) s += a[m] * b[k - m];
    out[k] = s;
  }
  return out;
}

SeriesCoeffs dt_recursion(const SystemState& x0, const SystemParams& p, const WtgModeCoeffs& mode,
                          double dpd, int order_k) {
  if (order_k < 1) throw ConfigError("series order K must be >= 1");
  if (x0.turbine_count() != mode.size()) {
    throw ConfigError("initial state has " + std::to_string(x0.turbine_count()) +
                      " rotor components but mode has " + std::to_string(mode.size()) +
                      " turbines");
  }
  const double gamma = closure_factor(p, mode);
  const double swing = p.swing_gain();
  const double damping = p.D / p.omega_s;
  const double droop = p.droop_gain();
  const std::size_t n = mode.size();

  SeriesCoeffs out(n, order_k);
  auto dw = out.component(SystemState::kFrequency);
  auto dpm = out.component(SystemState::kMechanical);
  auto dpv = out.component(SystemState::kValve);
  for (std::size_t i = 0; i < x0.dimension(); ++i) out.component(i)[0] = x0[i];

  // (k+1) dw[k+1] with the d1 feed-through eliminated through gamma.
  auto scaled_next_dw = [&](std::size_t k) {
    double wtg = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto& t = mode.turbines[i];
      wtg += t.c * out.component(SystemState::kFirstRotor + i)[k] + t.d2 * dw[k];
    }
    const double impulse = k == 0 ? dpd : 0.0;
    return gamma * swing * (dpm[k] - impulse + wtg - damping * dw[k]);
  };

  const auto order = static_cast<std::size_t>(order_k);
  for (std::size_t k = 0; k <= order; ++k) {
    const double kp1 = static_cast<double>(k + 1);
    const double dw_rate = scaled_next_dw(k);

    bool finite = std::isfinite(dw_rate);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& t = mode.turbines[i];
      const double wr_k = out.component(SystemState::kFirstRotor + i)[k];
      const double pg = t.c * wr_k + t.d2 * dw[k] + t.d1 * dw_rate;
      out.pgen(i)[k] = pg;
      finite = finite && std::isfinite(pg);
      if (k < order) {
        const double next = (t.a * wr_k + t.b2 * dw[k] + t.b1 * dw_rate) / kp1;
        out.component(SystemState::kFirstRotor + i)[k + 1] = next;
        finite = finite && std::isfinite(next);
      }
    }
    if (k < order) {
      dw[k + 1] = dw_rate / kp1;
      dpm[k + 1] = (dpv[k] - dpm[k]) / p.tau_ch / kp1;
      dpv[k + 1] = (-dpv[k] - droop * dw[k]) / p.tau_g / kp1;
      finite = finite && std::isfinite(dpm[k + 1]) && std::isfinite(dpv[k + 1]);
    }
    if (!finite) {
      throw NumericalError("DT recursion produced a non-finite coefficient at order " +
                           std::to_string(k + 1));
    }
  }
  return out;
}

namespace {

std::size_t significant_length(std::span<const double> c, double dt, double tail_tol) {
  if (tail_tol <= 0.0 || c.size() <= 1) return c.size();
  const double adt = std::abs(dt);
  double power = 1.0;
  double largest = 0.0;
  std::size_t last = 0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const double term = std::abs(c[k]) * power;
    largest = std::max(largest, term);
    power *= adt;
  }
  if (largest == 0.0) return 1;
  power = 1.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (std::abs(c[k]) * power > tail_tol * largest) last = k;
    power *= adt;
  }
  return last + 1;
}

}  // namespace

double eval_polynomial(std::span<const double> c, double dt, double tail_tol) {
  if (c.empty()) return 0.0;
  const std::size_t len = significant_length(c, dt, tail_tol);
  double acc = c[len - 1];
  for (std::size_t k = len - 1; k-- > 0;) acc = acc * dt + c[k];
  return acc;
}

double eval_polynomial_derivative(std::span<const double> c, double dt) {
  if (c.size() <= 1) return 0.0;
  const std::size_t top = c.size() - 1;
  double acc = static_cast<double>(top) * c[top];
  for (std::size_t k = top - 1; k >= 1; --k) acc = acc * dt + static_cast<double>(k) * c[k];
  return acc;
}

SystemState eval_series(const SeriesCoeffs& coeffs, double dt, double tail_tol) {
  SystemState s(coeffs.turbine_count());
  for (std::size_t i = 0; i < coeffs.dimension(); ++i) {
    s[i] = eval_polynomial(coeffs.component(i), dt, tail_tol);
  }
  return s;
}

double eval_pgen_total(const SeriesCoeffs& coeffs, double dt, double tail_tol) {
  double total = 0.0;
  for (std::size_t i = 0; i < coeffs.turbine_count(); ++i) {
    total += eval_polynomial(coeffs.pgen(i), dt, tail_tol);
  }
  return total;
}

std::vector<double> series_residual(const SeriesCoeffs& coeffs, const SystemParams& params,
                                    const WtgModeCoeffs& mode, double dpd, double dt) {
  const SystemState x = eval_series(coeffs, dt);
  const SystemState f = rhs(x, params, mode, dpd);
  std::vector<double> out(coeffs.dimension());
  for (std::size_t i = 0; i < coeffs.dimension(); ++i) {
    out[i] = std::abs(eval_polynomial_derivative(coeffs.component(i), dt) - f[i]);
  }
  return out;
}

std::size_t WindowedSeries::window_index(double t) const {
  if (starts.empty()) throw std::logic_error("empty windowed series");
  const auto it = std::upper_bound(starts.begin(), starts.end(), t);
  if (it == starts.begin()) return 0;
  return static_cast<std::size_t>(std::distance(starts.begin(), it)) - 1;
}

SystemState WindowedSeries::state_at(double t) const {
  const std::size_t j = window_index(t);
  const double dt = std::clamp(t - starts[j], 0.0, lengths[j]);
  return eval_series(windows[j], dt, tail_tol);
}

double WindowedSeries::pgen_total_at(double t) const {
  const std::size_t j = window_index(t);
  const double dt = std::clamp(t - starts[j], 0.0, lengths[j]);
  return eval_pgen_total(windows[j], dt, tail_tol);
}

WindowedSeries propagate_windows(const SystemState& x0, const SystemParams& params,
                                 const WtgModeCoeffs& mode, double dpd, double horizon,
                                 const WindowConfig& wc) {
  wc.validate();
  if (!(std::isfinite(horizon) && horizon > 0.0)) throw ConfigError("horizon must be > 0");
  const auto count =
      static_cast<std::size_t>(std::max(1.0, std::ceil(horizon / wc.window_len - 1e-9)));

  WindowedSeries ws;
  ws.tail_tol = wc.tail_tol;
  ws.starts.reserve(count);
  ws.lengths.reserve(count);
  ws.windows.reserve(count);

  SystemState entry = x0;
  for (std::size_t j = 0; j < count; ++j) {
    const double start = static_cast<double>(j) * wc.window_len;
    const double len = j + 1 == count ? horizon - start : wc.window_len;
    try {
      ws.windows.push_back(dt_recursion(entry, params, mode, dpd, wc.order_k));
    } catch (const NumericalError& e) {
      throw NumericalError("window " + std::to_string(j) + " (t = " + std::to_string(start) +
                           " s): " + e.what());
    }
    ws.starts.push_back(start);
    ws.lengths.push_back(len);
    entry = eval_series(ws.windows.back(), len, wc.tail_tol);
    if (!entry.all_finite()) {
      throw NumericalError("window " + std::to_string(j) + " produced a non-finite end state");
    }
  }
  return ws;
}

Trajectory predict_trajectory(const SystemState& x0, const SystemParams& params,
                              const WtgModeCoeffs& mode, double dpd, double horizon,
                              const WindowConfig& wc, double sample_dt) {
  const auto grid = sample_grid(horizon, sample_dt);
  const WindowedSeries ws = propagate_windows(x0, params, mode, dpd, horizon, wc);
  Trajectory traj;
  traj.reserve(grid.size());
  for (double t : grid) {
    traj.push_back(t, ws.state_at(t), ws.pgen_total_at(t), mode.mode);
  }
  return traj;
}

}  // namespace wtgswitch
