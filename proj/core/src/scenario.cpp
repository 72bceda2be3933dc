#include "wtgswitch/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wtgswitch/errors.hpp"

namespace wtgswitch {

using nlohmann::json;

namespace {

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("unknown field '" + join(path, key) + "'");
    }
  }
}

const json* child_object(const json& obj, const std::string& path, std::string_view key) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end()) return nullptr;
  if (!it->is_object()) throw ConfigError("field '" + join(path, key) + "': expected an object");
  return &*it;
}

void read_number(const json& obj, const std::string& path, std::string_view key, double& out) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end()) return;
  if (!it->is_number()) throw ConfigError("field '" + join(path, key) + "': expected a number");
  out = it->get<double>();
  if (!std::isfinite(out)) throw ConfigError("field '" + join(path, key) + "': not finite");
}

void read_int(const json& obj, const std::string& path, std::string_view key, int& out) {
  const auto it = obj.find(std::string(key));
  if (it == obj.end()) return;
  if (!it->is_number_integer()) {
    throw ConfigError("field '" + join(path, key) + "': expected an integer");
  }
  out = it->get<int>();
}

TurbineCoeffs parse_turbine(const json& obj, const std::string& path) {
  if (!obj.is_object()) throw ConfigError("field '" + path + "': expected an object");
  reject_unknown(obj, path, {"a", "b1", "b2", "c", "d1", "d2"});
  TurbineCoeffs t;
  read_number(obj, path, "a", t.a);
  read_number(obj, path, "b1", t.b1);
  read_number(obj, path, "b2", t.b2);
  read_number(obj, path, "c", t.c);
  read_number(obj, path, "d1", t.d1);
  read_number(obj, path, "d2", t.d2);
  return t;
}

// Either one object repeated `count` times or an explicit per-turbine array.
WtgModeCoeffs parse_mode(const json& node, const std::string& path, OperatingMode mode,
                         std::optional<std::size_t> count) {
  WtgModeCoeffs out{mode, {}};
  if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) {
      out.turbines.push_back(parse_turbine(node[i], path + "[" + std::to_string(i) + "]"));
    }
    if (count && *count != out.size()) {
      throw ConfigError("field '" + path + "': array length " + std::to_string(out.size()) +
                        " differs from turbines.count = " + std::to_string(*count));
    }
    return out;
  }
  const TurbineCoeffs t = parse_turbine(node, path);
  out.turbines.assign(count.value_or(5), t);
  return out;
}

void parse_turbines(const json& obj, ScenarioConfig& cfg) {
  const std::string path = "turbines";
  reject_unknown(obj, path, {"count", "mppt", "support"});
  std::optional<std::size_t> count;
  if (const auto it = obj.find("count"); it != obj.end()) {
    if (!it->is_number_integer() || it->get<long long>() < 0) {
      throw ConfigError("field 'turbines.count': expected a non-negative integer");
    }
    count = it->get<std::size_t>();
  }
  const std::size_t n = count.value_or(5);
  cfg.modes.mppt = obj.contains("mppt")
                       ? parse_mode(obj["mppt"], "turbines.mppt", OperatingMode::Mppt, count)
                       : WtgModeCoeffs::uniform(OperatingMode::Mppt, n, case_study_mppt_turbine());
  cfg.modes.support =
      obj.contains("support")
          ? parse_mode(obj["support"], "turbines.support", OperatingMode::Support, count)
          : WtgModeCoeffs::uniform(OperatingMode::Support, n, case_study_support_turbine());
}

}  // namespace

StrategyKind ScenarioConfig::strategy_kind(std::string_view name) const {
  if (name == "deadband") return FixedDeadband{deadband_hz};
  if (name == "critical") return CriticalDeadband{};
  if (name == "predictive") return Predictive{horizon, window, integrator.sample_dt, decision_delay};
  throw ConfigError("unknown strategy '" + std::string(name) +
                    "' (expected deadband, critical or predictive)");
}

void ScenarioConfig::validate() const {
  system.validate();
  modes.validate();
  closure_factor(system, modes.mppt);
  closure_factor(system, modes.support);
  limits.validate();
  if (!(std::isfinite(disturbance.dp_mw))) throw ConfigError("disturbance.dp_mw must be finite");
  if (!(std::isfinite(disturbance.t0))) throw ConfigError("disturbance.t0 must be finite");
  if (!(std::isfinite(deadband_hz) && deadband_hz >= 0.0)) {
    throw ConfigError("deadband_hz must be >= 0");
  }
  if (!(std::isfinite(horizon) && horizon > 0.0)) throw ConfigError("horizon_s must be > 0");
  if (integrator.horizon != horizon) {
    throw ConfigError("integrator horizon must equal horizon_s");
  }
  window.validate();
  integrator.validate();
  if (!(std::isfinite(decision_delay) && decision_delay >= 0.0)) {
    throw ConfigError("decision_delay_s must be >= 0");
  }
  if (strategies.empty()) throw ConfigError("strategies must not be empty");
  std::set<std::string> seen;
  for (const auto& s : strategies) {
    strategy_kind(s);
    if (!seen.insert(s).second) throw ConfigError("strategy '" + s + "' listed twice");
  }
}

ScenarioConfig parse_config(std::string_view text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t column = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError("config parse error at line " + std::to_string(line) + ", column " +
                      std::to_string(column) + ": " + e.what());
  }
  if (!root.is_object()) throw ConfigError("config root must be a JSON object");

  reject_unknown(root, "",
                 {"system", "turbines", "disturbance", "limits", "deadband_hz", "strategies",
                  "horizon_s", "window", "integrator", "decision_delay_s", "output_dir",
                  "emit_timings"});

  ScenarioConfig cfg;
  if (const json* sys = child_object(root, "", "system")) {
    reject_unknown(*sys, "system",
                   {"H", "D", "R", "tau_ch", "tau_g", "omega_s", "base_mva", "droop_convention"});
    read_number(*sys, "system", "H", cfg.system.H);
    read_number(*sys, "system", "D", cfg.system.D);
    read_number(*sys, "system", "R", cfg.system.R);
    read_number(*sys, "system", "tau_ch", cfg.system.tau_ch);
    read_number(*sys, "system", "tau_g", cfg.system.tau_g);
    read_number(*sys, "system", "omega_s", cfg.system.omega_s);
    read_number(*sys, "system", "base_mva", cfg.system.base_mva);
    if (const auto it = sys->find("droop_convention"); it != sys->end()) {
      const std::string v = it->is_string() ? it->get<std::string>() : "";
      if (v == "normalized") {
        cfg.system.droop_convention = DroopConvention::Normalized;
      } else if (v == "literal") {
        cfg.system.droop_convention = DroopConvention::LiteralPaper;
      } else {
        throw ConfigError(
            "field 'system.droop_convention': expected \"normalized\" or \"literal\"");
      }
    }
  }
  if (const json* t = child_object(root, "", "turbines")) parse_turbines(*t, cfg);
  if (const json* d = child_object(root, "", "disturbance")) {
    reject_unknown(*d, "disturbance", {"dp_mw", "t0"});
    read_number(*d, "disturbance", "dp_mw", cfg.disturbance.dp_mw);
    read_number(*d, "disturbance", "t0", cfg.disturbance.t0);
  }
  if (const json* l = child_object(root, "", "limits")) {
    reject_unknown(*l, "limits", {"dw_lim"});
    read_number(*l, "limits", "dw_lim", cfg.limits.dw_lim);
  }
  read_number(root, "", "deadband_hz", cfg.deadband_hz);
  read_number(root, "", "horizon_s", cfg.horizon);
  read_number(root, "", "decision_delay_s", cfg.decision_delay);
  if (const auto it = root.find("strategies"); it != root.end()) {
    if (!it->is_array()) throw ConfigError("field 'strategies': expected an array of names");
    cfg.strategies.clear();
    for (const auto& s : *it) {
      if (!s.is_string()) throw ConfigError("field 'strategies': expected strings");
      cfg.strategies.push_back(s.get<std::string>());
    }
  }
  if (const json* w = child_object(root, "", "window")) {
    reject_unknown(*w, "window", {"window_len", "order_k", "tail_tol"});
    read_number(*w, "window", "window_len", cfg.window.window_len);
    read_int(*w, "window", "order_k", cfg.window.order_k);
    read_number(*w, "window", "tail_tol", cfg.window.tail_tol);
  }
  if (const json* i = child_object(root, "", "integrator")) {
    reject_unknown(*i, "integrator", {"step", "sample_dt"});
    read_number(*i, "integrator", "step", cfg.integrator.step);
    read_number(*i, "integrator", "sample_dt", cfg.integrator.sample_dt);
  }
  cfg.integrator.horizon = cfg.horizon;
  if (const auto it = root.find("output_dir"); it != root.end()) {
    if (!it->is_string()) throw ConfigError("field 'output_dir': expected a string");
    cfg.output_dir = it->get<std::string>();
  }
  if (const auto it = root.find("emit_timings"); it != root.end()) {
    if (!it->is_boolean()) throw ConfigError("field 'emit_timings': expected a boolean");
    cfg.emit_timings = it->get<bool>();
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::optional<double> RunReport::switch_time() const {
  if (events.empty()) return std::nullopt;
  return t0 + events.front().time;
}

namespace {

template <class Error>
[[noreturn]] void rethrow_annotated(const std::string& strategy, const Error& e) {
  throw Error("strategy '" + strategy + "': " + e.what());
}

double predictor_oracle_error(const ScenarioConfig& cfg) {
  const SystemState x0 = cfg.initial_state();
  const Trajectory oracle = integrate_fixed(x0, cfg.system, cfg.modes.mppt, cfg.dpd(), cfg.integrator);
  const Trajectory predicted = predict_trajectory(x0, cfg.system, cfg.modes.mppt, cfg.dpd(),
                                                  cfg.horizon, cfg.window, cfg.integrator.sample_dt);
  double worst = 0.0;
  for (std::size_t j = 0; j < std::min(oracle.size(), predicted.size()); ++j) {
    worst = std::max(worst, std::abs(oracle.states[j].dw() - predicted.states[j].dw()));
  }
  return worst;
}

}  // namespace

ScenarioResult evaluate_scenario(const ScenarioConfig& cfg) {
  cfg.validate();
  const double dpd = cfg.dpd();
  const double steady = steady_state_deviation(cfg.system, dpd);
  const double predictor_error = predictor_oracle_error(cfg);

  ScenarioResult result;
  for (const auto& name : cfg.strategies) {
    try {
      StrategyRun run = run_strategy(cfg.strategy_kind(name), cfg.initial_state(), dpd, cfg.system,
                                     cfg.modes, cfg.limits, cfg.integrator);
      RunReport r;
      r.strategy = name;
      r.decision = run.decision;
      r.events = run.trajectory.events;
      r.nadir = nadir(run.trajectory);
      r.safe = cfg.limits.is_safe(r.nadir.drop());
      r.steady_state_dw = steady;
      r.predictor_max_error = predictor_error;
      r.wall_clock_us = run.decision_wall_clock_us;
      if (run.critical && run.critical->width) r.critical_width = run.critical->width;
      r.t0 = cfg.disturbance.t0;
      r.trajectory = std::move(run.trajectory);
      result.reports.push_back(std::move(r));
    } catch (const UnsafeEvenWithSupport& e) {
      rethrow_annotated(name, e);
    } catch (const ConfigError& e) {
      rethrow_annotated(name, e);
    } catch (const NumericalError& e) {
      rethrow_annotated(name, e);
    }
  }
  return result;
}

void emit_artifacts(const ScenarioResult& result, const ScenarioConfig& cfg,
                    const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto write = [](const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
  };
  for (const auto& r : result.reports) {
    write(out_dir / ("trajectory_" + r.strategy + ".csv"), trajectory_csv(r.trajectory, r.t0));
  }
  write(out_dir / "decisions.json", decisions_json(result.reports, cfg.emit_timings));
  write(out_dir / "comparison.txt", compare_report(result.reports).to_text());
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir) {
  ScenarioResult result = evaluate_scenario(cfg);
  emit_artifacts(result, cfg, out_dir);
  return result;
}

std::string predict_decision_json(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Decision d = predictive_decide(cfg.initial_state(), cfg.dpd(), cfg.system, cfg.modes.mppt,
                                       cfg.limits, cfg.horizon, cfg.window,
                                       cfg.integrator.sample_dt);
  const auto stop = std::chrono::steady_clock::now();

  RunReport r;
  r.strategy = "predictive";
  r.decision = d;
  r.t0 = cfg.disturbance.t0;
  r.wall_clock_us = std::chrono::duration<double, std::micro>(stop - start).count();
  if (d.mode == OperatingMode::Support) {
    r.events.push_back(SwitchEvent{cfg.decision_delay, OperatingMode::Mppt, OperatingMode::Support,
                                   "predicted unsafe", cfg.initial_state()});
  }
  return decision_json(r, cfg.emit_timings);
}

}  // namespace wtgswitch
