#pragma once

// Scenario configuration, execution, and artifact emission.
//
// Config files are JSON; every field is optional and falls back to the
// case-study defaults (see README). Emitted numbers use 12 significant
// digits so repeated runs produce byte-identical files.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wtgswitch/dt_engine.hpp"
#include "wtgswitch/model.hpp"
#include "wtgswitch/reference_integrator.hpp"
#include "wtgswitch/strategies.hpp"
#include "wtgswitch/trajectory.hpp"

namespace wtgswitch {

struct ScenarioConfig {
  SystemParams system;
  ModePair modes = case_study_modes(5);
  Disturbance disturbance{-500.0, 0.0};
  SafetyLimits limits;
  double deadband_hz = 0.2;
  std::vector<std::string> strategies{"deadband", "predictive"};
  double horizon = 20.0;
  WindowConfig window;
  IntegratorConfig integrator;  // integrator.horizon mirrors `horizon`
  double decision_delay = 0.0;
  std::filesystem::path output_dir = "out";
  bool emit_timings = false;  // wall-clock fields are null unless set

  double dpd() const { return disturbance.per_unit(system.base_mva); }
  SystemState initial_state() const { return SystemState(modes.mppt.size()); }
  StrategyKind strategy_kind(std::string_view name) const;

  // Throws ConfigError naming the violated invariant.
  void validate() const;
};

// Parses and validates a JSON config. Throws ConfigError with the line and
// column of a syntax error, or the dotted field path of a bad value.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

struct RunReport {
  std::string strategy;
  Decision decision;
  std::vector<SwitchEvent> events;
  Nadir nadir;
  bool safe = true;
  double steady_state_dw = 0.0;      // Hz, analytic MPPT equilibrium
  double predictor_max_error = 0.0;  // Hz, DT vs RK4 over the MPPT run
  double wall_clock_us = 0.0;        // decision computation time
  std::optional<double> critical_width;
  double t0 = 0.0;
  Trajectory trajectory;

  bool switched() const { return !events.empty(); }
  std::optional<double> switch_time() const;  // absolute, s
};

struct ScenarioResult {
  std::vector<RunReport> reports;
};

// Runs every configured strategy. Errors are re-thrown with the strategy
// name prefixed.
ScenarioResult evaluate_scenario(const ScenarioConfig& cfg);

// evaluate_scenario + emit_artifacts into out_dir.
ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

// Writes trajectory_<strategy>.csv, decisions.json and comparison.txt.
void emit_artifacts(const ScenarioResult& result, const ScenarioConfig& cfg,
                    const std::filesystem::path& out_dir);

// Predictive verdict only, as a decision JSON object.
std::string predict_decision_json(const ScenarioConfig& cfg);

std::string trajectory_csv(const Trajectory& traj, double t0 = 0.0);
Trajectory parse_trajectory_csv(std::string_view csv, double t0 = 0.0);
std::string decision_json(const RunReport& report, bool emit_timings);
std::string decisions_json(std::span<const RunReport> reports, bool emit_timings);

// Schema check for a decision object (or an array of them). Returns the list
// of violations; empty means valid.
std::vector<std::string> check_decision_json(std::string_view text);

struct ComparisonTable {
  struct Row {
    std::string strategy;
    bool switched = false;
    std::optional<double> switch_time;
    double nadir_drop = 0.0;
    bool safe = true;
  };
  std::vector<Row> rows;  // input order

  std::string to_text() const;
};

ComparisonTable compare_report(std::span<const RunReport> reports);

// 12 significant digits, the precision of every emitted number.
std::string format_number(double v);

}  // namespace wtgswitch
