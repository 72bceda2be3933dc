#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wtgswitch/model.hpp"

namespace wtgswitch {

struct SwitchEvent {
  double time = 0.0;  // s, relative to disturbance detection
  OperatingMode from = OperatingMode::Mppt;
  OperatingMode to = OperatingMode::Support;
  std::string trigger;
  SystemState state;  // state at the switching instant (continuous across it)
};

// Sampled time series. Times are relative to the disturbance detection time.
struct Trajectory {
  std::vector<double> times;
  std::vector<SystemState> states;
  std::vector<double> pgen_total;  // total WTG power, pu
  std::vector<OperatingMode> modes;
  std::vector<SwitchEvent> events;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
  void reserve(std::size_t n);
  void push_back(double t, SystemState state, double pgen, OperatingMode mode);
};

// Sample instants j*sample_dt for j = 0.. up to `horizon`, plus `horizon`
// itself when it is off the grid. Spacing below 1e-9*sample_dt is merged.
std::vector<double> sample_grid(double horizon, double sample_dt);

struct Nadir {
  double time = 0.0;
  double dw = 0.0;  // Hz, most negative sampled deviation
  double drop() const { return dw < 0.0 ? -dw : 0.0; }
};

// Sample-grid minimum of dw; first occurrence on ties. Throws
// std::invalid_argument on an empty trajectory.
Nadir nadir(const Trajectory& traj);

// Under-frequency drop magnitude max(0, -dw).
inline double drop_magnitude(double dw) { return dw < 0.0 ? -dw : 0.0; }

}  // namespace wtgswitch
