#include "wtgswitch/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "wtgswitch/errors.hpp"

namespace wtgswitch {

void Trajectory::reserve(std::size_t n) {
  times.reserve(n);
  states.reserve(n);
  pgen_total.reserve(n);
  modes.reserve(n);
}

void Trajectory::push_back(double t, SystemState state, double pgen, OperatingMode mode) {
  times.push_back(t);
  states.push_back(std::move(state));
  pgen_total.push_back(pgen);
  modes.push_back(mode);
}

std::vector<double> sample_grid(double horizon, double sample_dt) {
  if (!(horizon > 0.0) || !(sample_dt > 0.0) || !std::isfinite(horizon) ||
      !std::isfinite(sample_dt)) {
    throw ConfigError("sample grid needs horizon > 0 and sample_dt > 0");
  }
  const double eps = 1e-9 * sample_dt;
  const auto n = static_cast<std::size_t>(std::floor(horizon / sample_dt + 1e-9));
  std::vector<double> grid;
  grid.reserve(n + 2);
  for (std::size_t j = 0; j <= n; ++j) {
    grid.push_back(std::min(static_cast<double>(j) * sample_dt, horizon));
  }
  if (horizon - grid.back() > eps) {
    grid.push_back(horizon);
  } else {
    grid.back() = std::min(grid.back(), horizon);
  }
  return grid;
}

Nadir nadir(const Trajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("nadir of an empty trajectory");
  Nadir best{traj.times.front(), traj.states.front().dw()};
  for (std::size_t j = 1; j < traj.size(); ++j) {
    const double dw = traj.states[j].dw();
    if (dw < best.dw) best = Nadir{traj.times[j], dw};
  }
  return best;
}

}  // namespace wtgswitch
