#pragma once

// Aggregate system-frequency-response model augmented with reduced-order
// wind turbine generator (WTG) dynamics.
//
// State layout: [dw, dpm, dpv, dwr_1 .. dwr_N]
//   dw   frequency deviation (Hz)
//   dpm  turbine mechanical power deviation (pu)
//   dpv  governor valve power deviation (pu)
//   dwr  WTG rotor speed deviations (pu)
//
// The WTG output feeds back the frequency derivative (d1 terms), which makes
// the swing equation implicit in dw_dot. The loop is closed analytically with
//   gamma = 1 / (1 - omega_s/(2H) * sum(d1)).

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace wtgswitch {

enum class DroopConvention {
  Normalized,    // -dw / (R * omega_s): droop on a per-unit frequency base
  LiteralPaper,  // -dw / R with dw carried in Hz
};

std::string_view to_string(DroopConvention c);

struct SystemParams {
  double H = 4.0;         // s
  double D = 1.0;         // pu power / pu frequency
  double R = 0.05;        // pu
  double tau_ch = 0.3;    // s
  double tau_g = 0.1;     // s
  double omega_s = 60.0;  // Hz
  double base_mva = 6000.0;
  DroopConvention droop_convention = DroopConvention::Normalized;

  // Throws ConfigError naming the violated invariant.
  void validate() const;

  // omega_s / (2H)
  double swing_gain() const { return omega_s / (2.0 * H); }
  // Coefficient multiplying dw in the governor equation.
  double droop_gain() const;
};

// One turbine's coefficient sextuple for a given operating mode.
struct TurbineCoeffs {
  double a = 0.0;   // rotor self-dynamics, 1/s (must be < 0)
  double b1 = 0.0;  // frequency-derivative input gain
  double b2 = 0.0;  // frequency input gain
  double c = 0.0;   // rotor-to-power output gain
  double d1 = 0.0;  // frequency-derivative feed-through
  double d2 = 0.0;  // frequency feed-through

  bool has_support_terms() const { return b1 != 0.0 || b2 != 0.0 || d1 != 0.0 || d2 != 0.0; }
};

enum class OperatingMode { Mppt, Support };

std::string_view to_string(OperatingMode m);

// Coefficients of all N turbines for one operating mode.
struct WtgModeCoeffs {
  OperatingMode mode = OperatingMode::Mppt;
  std::vector<TurbineCoeffs> turbines;

  static WtgModeCoeffs uniform(OperatingMode mode, std::size_t n, const TurbineCoeffs& coeffs);

  std::size_t size() const { return turbines.size(); }
  double sum_d1() const;

  // Checks a < 0 and, for MPPT, that all support gains vanish.
  void validate() const;
};

struct ModePair {
  WtgModeCoeffs mppt;
  WtgModeCoeffs support;

  void validate() const;
};

// Case-study constants: H=4, D=1, R=0.05, tau_ch=0.3, tau_g=0.1, 60 Hz.
SystemParams case_study_params();
TurbineCoeffs case_study_mppt_turbine();
TurbineCoeffs case_study_support_turbine();
ModePair case_study_modes(std::size_t n_turbines = 5);

// Fixed-dimension deviation state vector.
class SystemState {
 public:
  static constexpr std::size_t kFrequency = 0;
  static constexpr std::size_t kMechanical = 1;
  static constexpr std::size_t kValve = 2;
  static constexpr std::size_t kFirstRotor = 3;

  SystemState() : SystemState(0) {}
  explicit SystemState(std::size_t n_turbines) : values_(kFirstRotor + n_turbines, 0.0) {}
  static SystemState from_values(std::vector<double> values);

  std::size_t dimension() const { return values_.size(); }
  std::size_t turbine_count() const { return values_.size() - kFirstRotor; }

  double dw() const { return values_[kFrequency]; }
  double dpm() const { return values_[kMechanical]; }
  double dpv() const { return values_[kValve]; }
  double dwr(std::size_t i) const { return values_[kFirstRotor + i]; }
  double& dw() { return values_[kFrequency]; }
  double& dpm() { return values_[kMechanical]; }
  double& dpv() { return values_[kValve]; }
  double& dwr(std::size_t i) { return values_[kFirstRotor + i]; }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  SystemState& operator+=(const SystemState& other);
  SystemState& operator*=(double s);
  friend SystemState operator+(SystemState a, const SystemState& b) { return a += b; }
  friend SystemState operator*(double s, SystemState a) { return a *= s; }
  friend bool operator==(const SystemState&, const SystemState&) = default;

  bool all_finite() const;

 private:
  std::vector<double> values_;
};

struct Disturbance {
  double dp_mw = 0.0;  // signed imbalance; negative = loss of generation
  double t0 = 0.0;     // detection time, s

  // Per-unit imbalance with the model's sign: positive drives dw down.
  double per_unit(double base_mva) const { return -dp_mw / base_mva; }
};

// gamma = 1 / (1 - omega_s/(2H) * sum(d1)). Throws ConfigError when the
// denominator is not positive.
double closure_factor(const SystemParams& params, const WtgModeCoeffs& mode);

// Time derivative of every state component.
SystemState rhs(const SystemState& state, const SystemParams& params, const WtgModeCoeffs& mode,
                double dpd);

// Allocation-free variant used by the integrators. `gamma` must be
// closure_factor(params, mode).
void rhs_into(std::span<const double> state, const SystemParams& params, const WtgModeCoeffs& mode,
              double dpd, double gamma, std::span<double> out);

// Sum over turbines of c*dwr + d1*dw_dot + d2*dw.
double wtg_power_output(const SystemState& state, double dw_dot, const WtgModeCoeffs& mode);

// Equilibrium frequency deviation in MPPT mode.
double steady_state_deviation(const SystemParams& params, double dpd);

}  // namespace wtgswitch
