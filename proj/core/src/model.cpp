#include "wtgswitch/model.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "wtgswitch/errors.hpp"

namespace wtgswitch {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

std::string_view to_string(DroopConvention c) {
  switch (c) {
    case DroopConvention::Normalized:
      return "normalized";
    case DroopConvention::LiteralPaper:
      return "literal";
  }
  return "unknown";
}

std::string_view to_string(OperatingMode m) {
  return m == OperatingMode::Mppt ? "mppt" : "support";
}

void SystemParams::validate() const {
  require(std::isfinite(H) && H > 0.0, "system.H must be > 0");
  require(std::isfinite(tau_ch) && tau_ch > 0.0, "system.tau_ch must be > 0");
  require(std::isfinite(tau_g) && tau_g > 0.0, "system.tau_g must be > 0");
  require(std::isfinite(R) && R > 0.0, "system.R must be > 0");
  require(std::isfinite(omega_s) && omega_s > 0.0, "system.omega_s must be > 0");
  require(std::isfinite(base_mva) && base_mva > 0.0, "system.base_mva must be > 0");
  require(std::isfinite(D) && D >= 0.0, "system.D must be >= 0");
}

double SystemParams::droop_gain() const {
  return droop_convention == DroopConvention::Normalized ? 1.0 / (R * omega_s) : 1.0 / R;
}

WtgModeCoeffs WtgModeCoeffs::uniform(OperatingMode mode, std::size_t n,
                                     const TurbineCoeffs& coeffs) {
  return WtgModeCoeffs{mode, std::vector<TurbineCoeffs>(n, coeffs)};
}

double WtgModeCoeffs::sum_d1() const {
  double s = 0.0;
  for (const auto& t : turbines) s += t.d1;
  return s;
}

void WtgModeCoeffs::validate() const {
  for (std::size_t i = 0; i < turbines.size(); ++i) {
    const auto& t = turbines[i];
    const std::string id = std::string(to_string(mode)) + " turbine " + std::to_string(i + 1);
    require(std::isfinite(t.a) && std::isfinite(t.b1) && std::isfinite(t.b2) &&
                std::isfinite(t.c) && std::isfinite(t.d1) && std::isfinite(t.d2),
            id + ": coefficients must be finite");
    require(t.a < 0.0, id + ": a must be < 0");
    if (mode == OperatingMode::Mppt) {
      require(!t.has_support_terms(), id + ": b1, b2, d1, d2 must be zero in MPPT mode");
    }
  }
}

void ModePair::validate() const {
  require(mppt.mode == OperatingMode::Mppt, "mode pair: first entry must be MPPT");
  require(support.mode == OperatingMode::Support, "mode pair: second entry must be support");
  require(mppt.size() == support.size(), "mode pair: turbine counts differ between modes");
  mppt.validate();
  support.validate();
}

SystemParams case_study_params() { return SystemParams{}; }

TurbineCoeffs case_study_mppt_turbine() {
  return TurbineCoeffs{.a = -0.0723, .b1 = 0.0, .b2 = 0.0, .c = 0.0127, .d1 = 0.0, .d2 = 0.0};
}

TurbineCoeffs case_study_support_turbine() {
  return TurbineCoeffs{.a = -0.0723, .b1 = -0.6246, .b2 = 0.1874, .c = 0.0127, .d1 = -0.10,
                       .d2 = -0.03};
}

ModePair case_study_modes(std::size_t n_turbines) {
  return ModePair{
      WtgModeCoeffs::uniform(OperatingMode::Mppt, n_turbines, case_study_mppt_turbine()),
      WtgModeCoeffs::uniform(OperatingMode::Support, n_turbines, case_study_support_turbine())};
}

SystemState SystemState::from_values(std::vector<double> values) {
  if (values.size() < kFirstRotor) {
    throw ConfigError("state vector needs at least 3 components");
  }
  SystemState s;
  s.values_ = std::move(values);
  return s;
}

SystemState& SystemState::operator+=(const SystemState& other) {
  if (other.dimension() != dimension()) throw ConfigError("state dimension mismatch");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

SystemState& SystemState::operator*=(double s) {
  for (auto& v : values_) v *= s;
  return *this;
}

bool SystemState::all_finite() const {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double closure_factor(const SystemParams& params, const WtgModeCoeffs& mode) {
  const double sum_d1 = mode.sum_d1();
  const double denom = 1.0 - params.swing_gain() * sum_d1;
  if (!(denom > 0.0)) {
    std::ostringstream os;
    os << "infeasible algebraic loop closure: 1 - omega_s/(2H)*sum(d1) = " << denom
       << " <= 0 with sum(d1) = " << sum_d1;
    throw ConfigError(os.str());
  }
  return 1.0 / denom;
}

void rhs_into(std::span<const double> x, const SystemParams& p, const WtgModeCoeffs& mode,
              double dpd, double gamma, std::span<double> out) {
  const double dw = x[SystemState::kFrequency];
  const double dpm = x[SystemState::kMechanical];
  const double dpv = x[SystemState::kValve];
  const std::size_t n = mode.size();

  double wtg = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = mode.turbines[i];
    wtg += t.c * x[SystemState::kFirstRotor + i] + t.d2 * dw;
  }
  const double dw_dot = gamma * p.swing_gain() * (dpm - dpd + wtg - (p.D / p.omega_s) * dw);

  out[SystemState::kFrequency] = dw_dot;
  out[SystemState::kMechanical] = (dpv - dpm) / p.tau_ch;
  out[SystemState::kValve] = (-dpv - p.droop_gain() * dw) / p.tau_g;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = mode.turbines[i];
    out[SystemState::kFirstRotor + i] =
        t.a * x[SystemState::kFirstRotor + i] + t.b2 * dw + t.b1 * dw_dot;
  }
}

SystemState rhs(const SystemState& state, const SystemParams& params, const WtgModeCoeffs& mode,
                double dpd) {
  if (state.turbine_count() != mode.size()) {
    throw ConfigError("state has " + std::to_string(state.turbine_count()) +
                      " rotor components but mode has " + std::to_string(mode.size()) +
                      " turbines");
  }
  const double gamma = closure_factor(params, mode);
  SystemState out(mode.size());
  rhs_into(state.values(), params, mode, dpd, gamma, out.values());
  return out;
}

double wtg_power_output(const SystemState& state, double dw_dot, const WtgModeCoeffs& mode) {
  double total = 0.0;
  for (std::size_t i = 0; i < mode.size(); ++i) {
    const auto& t = mode.turbines[i];
    total += t.c * state.dwr(i) + t.d1 * dw_dot + t.d2 * state.dw();
  }
  return total;
}

double steady_state_deviation(const SystemParams& params, double dpd) {
  return -dpd / (params.droop_gain() + params.D / params.omega_s);
}

}  // namespace wtgswitch
