#include "wtgswitch/reference_integrator.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "wtgswitch/errors.hpp"

namespace wtgswitch {

void IntegratorConfig::validate() const {
  if (!(std::isfinite(step) && step > 0.0)) throw ConfigError("integrator.step must be > 0");
  if (!(std::isfinite(sample_dt) && sample_dt >= step)) {
    throw ConfigError("integrator.sample_dt must be >= integrator.step");
  }
  if (!(std::isfinite(horizon) && horizon >= sample_dt)) {
    throw ConfigError("horizon must be >= integrator.sample_dt");
  }
}

bool deadband_exceeded(double dw, double width) {
  const double drop = drop_magnitude(dw);
  return drop > 0.0 && drop >= width;
}

namespace {

class Rk4Stepper {
 public:
  Rk4Stepper(const SystemParams& params, double dpd, std::size_t dim)
      : params_(params), dpd_(dpd), k1_(dim), k2_(dim), k3_(dim), k4_(dim), tmp_(dim) {}

  void set_mode(const WtgModeCoeffs& mode) {
    mode_ = &mode;
    gamma_ = closure_factor(params_, mode);
  }
  const WtgModeCoeffs& mode() const { return *mode_; }

  // out = x advanced by h.
  void step(const SystemState& x, double h, SystemState& out) {
    const auto xv = x.values();
    const std::size_t n = xv.size();
    rhs_into(xv, params_, *mode_, dpd_, gamma_, k1_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = xv[i] + 0.5 * h * k1_[i];
    rhs_into(tmp_, params_, *mode_, dpd_, gamma_, k2_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = xv[i] + 0.5 * h * k2_[i];
    rhs_into(tmp_, params_, *mode_, dpd_, gamma_, k3_);
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = xv[i] + h * k3_[i];
    rhs_into(tmp_, params_, *mode_, dpd_, gamma_, k4_);
    auto ov = out.values();
    for (std::size_t i = 0; i < n; ++i) {
      ov[i] = xv[i] + h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
  }

  double pgen_total(const SystemState& x) {
    rhs_into(x.values(), params_, *mode_, dpd_, gamma_, k1_);
    return wtg_power_output(x, k1_[SystemState::kFrequency], *mode_);
  }

 private:
  const SystemParams& params_;
  double dpd_;
  const WtgModeCoeffs* mode_ = nullptr;
  double gamma_ = 1.0;
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

std::string format_time(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

void check_finite(const SystemState& x, double t) {
  if (!x.all_finite()) {
    throw NumericalError("integration blew up (non-finite state) at t = " + format_time(t) + " s");
  }
}

struct RunSetup {
  const WtgModeCoeffs& initial;
  const WtgModeCoeffs* support;  // null when no switching is possible
  SwitchPolicy policy;
};

Trajectory run(const SystemState& x0, const SystemParams& params, double dpd,
               const RunSetup& setup, const IntegratorConfig& cfg) {
  params.validate();
  cfg.validate();
  if (!std::isfinite(dpd)) throw ConfigError("disturbance must be finite");
  if (x0.turbine_count() != setup.initial.size()) {
    throw ConfigError("initial state dimension does not match turbine count");
  }

  Rk4Stepper stepper(params, dpd, x0.dimension());
  stepper.set_mode(setup.initial);
  if (setup.support != nullptr) closure_factor(params, *setup.support);

  Trajectory traj;
  bool switched = false;
  OperatingMode active = setup.initial.mode;

  auto do_switch = [&](double t, const SystemState& x, std::string trigger) {
    stepper.set_mode(*setup.support);
    traj.events.push_back(SwitchEvent{t, active, setup.support->mode, std::move(trigger), x});
    active = setup.support->mode;
    switched = true;
  };

  const auto* on_drop = std::get_if<SwitchOnDrop>(&setup.policy);
  const auto* at_time = std::get_if<SwitchAtTime>(&setup.policy);
  const bool can_switch = setup.support != nullptr && (on_drop != nullptr || at_time != nullptr);

  std::string drop_trigger;
  if (on_drop != nullptr) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "frequency drop reached deadband %.6g Hz", on_drop->width);
    drop_trigger = buf;
  }

  SystemState x = x0;
  SystemState next(x0.turbine_count());
  SystemState probe(x0.turbine_count());

  if (can_switch) {
    if (at_time != nullptr && at_time->time <= 0.0) {
      do_switch(0.0, x, "scheduled switch at detection");
    } else if (on_drop != nullptr && deadband_exceeded(x.dw(), on_drop->width)) {
      do_switch(0.0, x, drop_trigger);
    }
  }

  const auto grid = sample_grid(cfg.horizon, cfg.sample_dt);
  traj.reserve(grid.size());
  traj.push_back(grid[0], x, stepper.pgen_total(x), active);

  for (std::size_t j = 1; j < grid.size(); ++j) {
    const double t_begin = grid[j - 1];
    const double span = grid[j] - t_begin;
    const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(span / cfg.step - 1e-9)));
    const double h = span / static_cast<double>(substeps);

    for (std::size_t s = 0; s < substeps; ++s) {
      const double t = t_begin + static_cast<double>(s) * h;
      const double t_end = s + 1 == substeps ? grid[j] : t + h;
      const double step_len = t_end - t;

      if (can_switch && !switched && at_time != nullptr && at_time->time > t &&
          at_time->time < t_end) {
        const double first = at_time->time - t;
        stepper.step(x, first, next);
        check_finite(next, at_time->time);
        do_switch(at_time->time, next, "scheduled switch");
        stepper.step(next, step_len - first, x);
        check_finite(x, t_end);
        continue;
      }

      stepper.step(x, step_len, next);
      check_finite(next, t_end);

      if (can_switch && !switched && at_time != nullptr && at_time->time == t_end) {
        x = next;
        do_switch(t_end, x, "scheduled switch");
        continue;
      }

      if (can_switch && !switched && on_drop != nullptr &&
          deadband_exceeded(next.dw(), on_drop->width)) {
        double lo = 0.0;
        double hi = step_len;
        while (hi - lo > kEventTimeTolerance) {
          const double mid = 0.5 * (lo + hi);
          stepper.step(x, mid, probe);
          if (deadband_exceeded(probe.dw(), on_drop->width)) {
            hi = mid;
          } else {
            lo = mid;
          }
        }
        if (hi < step_len) {
          stepper.step(x, hi, probe);
          check_finite(probe, t + hi);
          do_switch(t + hi, probe, drop_trigger);
          stepper.step(probe, step_len - hi, x);
          check_finite(x, t_end);
        } else {
          x = next;
          do_switch(t_end, x, drop_trigger);
        }
        continue;
      }

      std::swap(x, next);
    }
    traj.push_back(grid[j], x, stepper.pgen_total(x), active);
  }
  return traj;
}

}  // namespace

Trajectory integrate_fixed(const SystemState& x0, const SystemParams& params,
                           const WtgModeCoeffs& mode, double dpd, const IntegratorConfig& cfg) {
  mode.validate();
  return run(x0, params, dpd, RunSetup{mode, nullptr, NeverSwitch{}}, cfg);
}

Trajectory simulate_closed_loop(const SystemState& x0, const SystemParams& params,
                                const ModePair& modes, double dpd, const SwitchPolicy& policy,
                                const IntegratorConfig& cfg) {
  modes.validate();
  if (const auto* d = std::get_if<SwitchOnDrop>(&policy); d != nullptr && !(d->width >= 0.0)) {
    throw ConfigError("deadband width must be >= 0");
  }
  return run(x0, params, dpd, RunSetup{modes.mppt, &modes.support, policy}, cfg);
}

}  // namespace wtgswitch
