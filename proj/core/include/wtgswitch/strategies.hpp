#pragma once

// Switching decision rules for WTGs after a detected power imbalance:
//   fixed deadband     MPPT while the drop stays below a preset width
//   critical deadband  same, with a per-disturbance width found by simulation
//   predictive         MPPT iff the predicted MPPT response never reaches the
//                      safety limit over [t0, t0 + T]
// Every rule sends threshold ties to support.

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "wtgswitch/dt_engine.hpp"
#include "wtgswitch/model.hpp"
#include "wtgswitch/reference_integrator.hpp"
#include "wtgswitch/trajectory.hpp"

namespace wtgswitch {

struct SafetyLimits {
  double dw_lim = 0.5;  // Hz, drop magnitude

  void validate() const;
  // Strictly below the limit.
  bool is_safe(double drop) const { return drop < dw_lim; }
};

struct FixedDeadband {
  double width = 0.2;  // Hz
};
struct CriticalDeadband {};
struct Predictive {
  double horizon = 20.0;  // s
  WindowConfig window;
  double sample_dt = 1e-2;       // s
  double decision_delay = 0.0;   // s, models computation latency
};
using StrategyKind = std::variant<FixedDeadband, CriticalDeadband, Predictive>;

void validate(const StrategyKind& kind);
std::string_view strategy_name(const StrategyKind& kind);

enum class Trigger { BelowThreshold, AboveThreshold, PredictedSafe, PredictedUnsafe };
std::string_view to_string(Trigger t);

struct Decision {
  OperatingMode mode = OperatingMode::Mppt;
  Trigger trigger = Trigger::BelowThreshold;
  std::optional<double> predicted_nadir;       // Hz, predictive only
  std::optional<double> first_violation_time;  // s after t0, predictive + unsafe only
};

// MPPT iff the drop max(0, -dw_t0) is below width; a zero drop is always MPPT.
Decision deadband_decide(double dw_t0, double width);

// Result of the critical-width search. An empty width means the MPPT
// response is already safe (compares as +infinity).
struct CriticalWidth {
  std::optional<double> width;
  double mppt_drop = 0.0;  // Hz, open-loop MPPT nadir drop
  int simulations = 0;

  bool no_switch_needed() const { return !width.has_value(); }
};

inline constexpr double kCriticalWidthTolerance = 1e-4;  // Hz

// Largest deadband width that still keeps the closed-loop drop below the
// limit, found by bisection over [0, MPPT drop]. Throws
// UnsafeEvenWithSupport when switching at the first sign of a drop is unsafe.
CriticalWidth compute_critical_deadband(double dpd, const SystemParams& params,
                                        const ModePair& modes, const SafetyLimits& limits,
                                        const IntegratorConfig& cfg);
CriticalWidth compute_critical_deadband(const SystemState& x0, double dpd,
                                        const SystemParams& params, const ModePair& modes,
                                        const SafetyLimits& limits, const IntegratorConfig& cfg);

Decision critical_decide(double dw_t0, double dpd, const CriticalWidth& crit);

// Predicts the response under the MPPT coefficients and checks it against
// the limit at every sample.
Decision predictive_decide(const SystemState& x_t0, double dpd, const SystemParams& params,
                           const WtgModeCoeffs& mppt_mode, const SafetyLimits& limits,
                           double horizon, const WindowConfig& wc, double sample_dt = 1e-2);

// Maps a strategy onto the closed-loop simulator's switching policy and runs
// it. For the predictive rule the verdict is taken at detection.
struct StrategyRun {
  Decision decision;
  Trajectory trajectory;
  std::optional<CriticalWidth> critical;
  double decision_wall_clock_us = 0.0;
};

StrategyRun run_strategy(const StrategyKind& kind, const SystemState& x0, double dpd,
                         const SystemParams& params, const ModePair& modes,
                         const SafetyLimits& limits, const IntegratorConfig& cfg);

}  // namespace wtgswitch
