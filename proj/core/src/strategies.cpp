#include "wtgswitch/strategies.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "wtgswitch/errors.hpp"

namespace wtgswitch {

void SafetyLimits::validate() const {
  if (!(std::isfinite(dw_lim) && dw_lim > 0.0)) throw ConfigError("limits.dw_lim must be > 0");
}

void validate(const StrategyKind& kind) {
  if (const auto* f = std::get_if<FixedDeadband>(&kind)) {
    if (!(std::isfinite(f->width) && f->width >= 0.0)) {
      throw ConfigError("deadband width must be >= 0");
    }
  } else if (const auto* p = std::get_if<Predictive>(&kind)) {
    if (!(std::isfinite(p->horizon) && p->horizon > 0.0)) {
      throw ConfigError("predictive horizon must be > 0");
    }
    if (!(std::isfinite(p->sample_dt) && p->sample_dt > 0.0)) {
      throw ConfigError("predictive sample_dt must be > 0");
    }
    if (!(std::isfinite(p->decision_delay) && p->decision_delay >= 0.0)) {
      throw ConfigError("decision delay must be >= 0");
    }
    p->window.validate();
  }
}

std::string_view strategy_name(const StrategyKind& kind) {
  struct Namer {
    std::string_view operator()(const FixedDeadband&) const { return "deadband"; }
    std::string_view operator()(const CriticalDeadband&) const { return "critical"; }
    std::string_view operator()(const Predictive&) const { return "predictive"; }
  };
  return std::visit(Namer{}, kind);
}

std::string_view to_string(Trigger t) {
  switch (t) {
    case Trigger::BelowThreshold:
      return "below-threshold";
    case Trigger::AboveThreshold:
      return "above-threshold";
    case Trigger::PredictedSafe:
      return "predicted-safe";
    case Trigger::PredictedUnsafe:
      return "predicted-unsafe";
  }
  return "unknown";
}

Decision deadband_decide(double dw_t0, double width) {
  if (!(width >= 0.0)) throw ConfigError("deadband width must be >= 0");
  if (deadband_exceeded(dw_t0, width)) {
    return Decision{OperatingMode::Support, Trigger::AboveThreshold, {}, {}};
  }
  return Decision{OperatingMode::Mppt, Trigger::BelowThreshold, {}, {}};
}

namespace {

double closed_loop_drop(const SystemState& x0, double dpd, const SystemParams& params,
                        const ModePair& modes, double width, const IntegratorConfig& cfg) {
  return nadir(simulate_closed_loop(x0, params, modes, dpd, SwitchOnDrop{width}, cfg)).drop();
}

}  // namespace

CriticalWidth compute_critical_deadband(const SystemState& x0, double dpd,
                                        const SystemParams& params, const ModePair& modes,
                                        const SafetyLimits& limits, const IntegratorConfig& cfg) {
  if (!std::isfinite(dpd)) throw ConfigError("disturbance must be finite");
  limits.validate();

  CriticalWidth out;
  out.mppt_drop = nadir(integrate_fixed(x0, params, modes.mppt, dpd, cfg)).drop();
  out.simulations = 1;
  if (limits.is_safe(out.mppt_drop)) return out;

  const double immediate = closed_loop_drop(x0, dpd, params, modes, 0.0, cfg);
  ++out.simulations;
  if (!limits.is_safe(immediate)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "support activated at detection still drops %.6g Hz (limit %.6g Hz)", immediate,
                  limits.dw_lim);
    throw UnsafeEvenWithSupport(buf);
  }

  // Safety is assumed monotone in the width: lo is safe, hi is not.
  double lo = 0.0;
  double hi = out.mppt_drop;
  while (hi - lo > kCriticalWidthTolerance) {
    const double mid = 0.5 * (lo + hi);
    ++out.simulations;
    if (limits.is_safe(closed_loop_drop(x0, dpd, params, modes, mid, cfg))) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.width = lo;
  return out;
}

CriticalWidth compute_critical_deadband(double dpd, const SystemParams& params,
                                        const ModePair& modes, const SafetyLimits& limits,
                                        const IntegratorConfig& cfg) {
  return compute_critical_deadband(SystemState(modes.mppt.size()), dpd, params, modes, limits,
                                   cfg);
}

Decision critical_decide(double dw_t0, double /*dpd*/, const CriticalWidth& crit) {
  if (crit.no_switch_needed()) return Decision{OperatingMode::Mppt, Trigger::BelowThreshold, {}, {}};
  return deadband_decide(dw_t0, *crit.width);
}

Decision predictive_decide(const SystemState& x_t0, double dpd, const SystemParams& params,
                           const WtgModeCoeffs& mppt_mode, const SafetyLimits& limits,
                           double horizon, const WindowConfig& wc, double sample_dt) {
  limits.validate();
  const auto grid = sample_grid(horizon, sample_dt);
  const WindowedSeries ws = propagate_windows(x_t0, params, mppt_mode, dpd, horizon, wc);

  // Only the frequency component is needed for the verdict.
  Decision d{OperatingMode::Mppt, Trigger::PredictedSafe, {}, {}};
  double lowest = 0.0;
  bool first = true;
  for (double t : grid) {
    const std::size_t j = ws.window_index(t);
    const double dt = std::clamp(t - ws.starts[j], 0.0, ws.lengths[j]);
    const double dw = eval_polynomial(ws.windows[j].component(SystemState::kFrequency), dt, wc.tail_tol);
    if (first || dw < lowest) lowest = dw;
    first = false;
    if (!d.first_violation_time && !limits.is_safe(drop_magnitude(dw))) {
      d.mode = OperatingMode::Support;
      d.trigger = Trigger::PredictedUnsafe;
      d.first_violation_time = t;
    }
  }
  d.predicted_nadir = lowest;
  return d;
}

StrategyRun run_strategy(const StrategyKind& kind, const SystemState& x0, double dpd,
                         const SystemParams& params, const ModePair& modes,
                         const SafetyLimits& limits, const IntegratorConfig& cfg) {
  validate(kind);
  using clock = std::chrono::steady_clock;
  auto elapsed_us = [](clock::time_point since) {
    return std::chrono::duration<double, std::micro>(clock::now() - since).count();
  };

  StrategyRun out;
  SwitchPolicy policy = NeverSwitch{};
  const auto start = clock::now();

  if (const auto* fixed = std::get_if<FixedDeadband>(&kind)) {
    policy = SwitchOnDrop{fixed->width};
    out.decision_wall_clock_us = elapsed_us(start);
  } else if (std::holds_alternative<CriticalDeadband>(kind)) {
    out.critical = compute_critical_deadband(x0, dpd, params, modes, limits, cfg);
    out.decision_wall_clock_us = elapsed_us(start);
    if (out.critical->width) policy = SwitchOnDrop{*out.critical->width};
  } else {
    const auto& p = std::get<Predictive>(kind);
    out.decision = predictive_decide(x0, dpd, params, modes.mppt, limits, p.horizon, p.window,
                                     p.sample_dt);
    out.decision_wall_clock_us = elapsed_us(start);
    if (out.decision.mode == OperatingMode::Support) policy = SwitchAtTime{p.decision_delay};
  }

  out.trajectory = simulate_closed_loop(x0, params, modes, dpd, policy, cfg);

  // Deadband rules act as in-loop triggers: the verdict is whether the
  // crossing happened during the run.
  if (!std::holds_alternative<Predictive>(kind)) {
    out.decision = out.trajectory.events.empty()
                       ? Decision{OperatingMode::Mppt, Trigger::BelowThreshold, {}, {}}
                       : Decision{OperatingMode::Support, Trigger::AboveThreshold, {}, {}};
  }
  return out;
}

}  // namespace wtgswitch
