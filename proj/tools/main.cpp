// wtgswitch: command line front end.
//
//   wtgswitch run --config <path> --out <dir>
//   wtgswitch predict --config <path>
//   wtgswitch critical-db --config <path>
//
// Exit codes: 0 success, 1 config error, 2 numerical failure,
// 3 unsafe even with support activated at detection.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wtgswitch/errors.hpp"
#include "wtgswitch/scenario.hpp"
#include "wtgswitch/strategies.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 1, kNumericalError = 2, kUnsafe = 3 };

int run_command(const std::string& config_path, const std::string& out_dir) {
  auto cfg = wtgswitch::load_config(config_path);
  const std::filesystem::path dir = out_dir.empty() ? cfg.output_dir : std::filesystem::path(out_dir);
  const auto result = wtgswitch::run_scenario(cfg, dir);
  std::cout << wtgswitch::compare_report(result.reports).to_text();
  std::cout << "artifacts written to " << dir.string() << '\n';
  return kOk;
}

int predict_command(const std::string& config_path, bool timings) {
  auto cfg = wtgswitch::load_config(config_path);
  cfg.emit_timings = cfg.emit_timings || timings;
  std::cout << wtgswitch::predict_decision_json(cfg);
  return kOk;
}

int critical_command(const std::string& config_path) {
  const auto cfg = wtgswitch::load_config(config_path);
  const auto crit = wtgswitch::compute_critical_deadband(
      cfg.initial_state(), cfg.dpd(), cfg.system, cfg.modes, cfg.limits, cfg.integrator);
  if (crit.no_switch_needed()) {
    std::cout << "no-switch-needed\n";
  } else {
    std::cout << wtgswitch::format_number(*crit.width) << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive switching control of wind turbine generators for frequency response"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool timings = false;

  auto* run = app.add_subcommand("run", "Run every configured strategy and write artifacts");
  run->add_option("--config", config_path, "Scenario config (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory (defaults to the config's output_dir)");

  auto* predict = app.add_subcommand("predict", "Print the predictive decision as JSON");
  predict->add_option("--config", config_path, "Scenario config (JSON)")->required();
  predict->add_flag("--timings", timings, "Include the decision wall-clock time");

  auto* critical = app.add_subcommand("critical-db", "Print the critical deadband width in Hz");
  critical->add_option("--config", config_path, "Scenario config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return run_command(config_path, out_dir);
    if (*predict) return predict_command(config_path, timings);
    if (*critical) return critical_command(config_path);
  } catch (const wtgswitch::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const wtgswitch::UnsafeEvenWithSupport& e) {
    std::cerr << "unsafe even with support: " << e.what() << '\n';
    return kUnsafe;
  } catch (const wtgswitch::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumericalError;
  }
  return kOk;
}
