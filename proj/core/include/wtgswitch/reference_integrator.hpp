#pragma once

// Fixed-step classical Runge-Kutta integration of the model. Serves as the
// independent oracle for the series predictor and as the closed-loop hybrid
// simulator (MPPT -> support switching with located events).

#include <variant>

#include "wtgswitch/model.hpp"
#include "wtgswitch/trajectory.hpp"

namespace wtgswitch {

struct IntegratorConfig {
  double step = 1e-3;       // s, upper bound on the RK4 step
  double horizon = 20.0;    // s
  double sample_dt = 1e-2;  // s

  void validate() const;
};

// Switching rules understood by the closed-loop simulator. At most one
// MPPT -> support switch happens per run; there is no switch-back.
struct NeverSwitch {};
// Switch when the drop magnitude first reaches `width` (and is positive).
struct SwitchOnDrop {
  double width = 0.0;
};
// Switch at a fixed time after detection (predictive verdict + delay).
struct SwitchAtTime {
  double time = 0.0;
};
using SwitchPolicy = std::variant<NeverSwitch, SwitchOnDrop, SwitchAtTime>;

// Bisection tolerance on the located crossing time, s.
inline constexpr double kEventTimeTolerance = 1e-6;

// True when a deadband of `width` is exceeded by deviation dw. Ties go to
// support; a zero deviation never triggers.
bool deadband_exceeded(double dw, double width);

// Open-loop run in a single mode. Throws NumericalError with the time of
// blow-up if the state becomes non-finite.
Trajectory integrate_fixed(const SystemState& x0, const SystemParams& params,
                           const WtgModeCoeffs& mode, double dpd, const IntegratorConfig& cfg);

// Starts in MPPT and applies `policy`. The state is continuous across the
// switch; the WTG power may jump through the feed-through terms.
Trajectory simulate_closed_loop(const SystemState& x0, const SystemParams& params,
                                const ModePair& modes, double dpd, const SwitchPolicy& policy,
                                const IntegratorConfig& cfg);

}  // namespace wtgswitch
