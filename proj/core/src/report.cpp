#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "wtgswitch/errors.hpp"
#include "wtgswitch/scenario.hpp"

namespace wtgswitch {

using ordered_json = nlohmann::ordered_json;

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

namespace {

double rounded(double v) { return std::strtod(format_number(v).c_str(), nullptr); }

ordered_json number_or_null(std::optional<double> v) {
  return v ? ordered_json(rounded(*v)) : ordered_json(nullptr);
}

ordered_json decision_object(const RunReport& r, bool emit_timings) {
  ordered_json o;
  o["strategy"] = r.strategy;
  o["decision"] = std::string(to_string(r.decision.mode));
  o["trigger"] = std::string(to_string(r.decision.trigger));
  o["predicted_nadir_hz"] = number_or_null(r.decision.predicted_nadir);
  o["first_violation_time_s"] = number_or_null(
      r.decision.first_violation_time ? std::optional(r.t0 + *r.decision.first_violation_time)
                                      : std::nullopt);
  o["switch_time_s"] = number_or_null(r.switch_time());
  const bool simulated = !r.trajectory.empty();
  o["nadir_hz"] = number_or_null(simulated ? std::optional(r.nadir.dw) : std::nullopt);
  o["nadir_time_s"] = number_or_null(simulated ? std::optional(r.t0 + r.nadir.time) : std::nullopt);
  o["critical_width_hz"] = number_or_null(r.critical_width);
  o["wall_clock_us"] = number_or_null(emit_timings ? std::optional(r.wall_clock_us) : std::nullopt);
  return o;
}

}  // namespace

std::string trajectory_csv(const Trajectory& traj, double t0) {
  const std::size_t n = traj.empty() ? 0 : traj.states.front().turbine_count();
  std::ostringstream os;
  os << "t,dw_hz,dpm_pu,dpv_pu";
  for (std::size_t i = 0; i < n; ++i) os << ",dwr_" << (i + 1);
  os << ",dpgen_total_pu,mode\n";
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const auto& s = traj.states[j];
    os << format_number(t0 + traj.times[j]);
    for (std::size_t i = 0; i < s.dimension(); ++i) os << ',' << format_number(s[i]);
    os << ',' << format_number(traj.pgen_total[j]) << ',' << to_string(traj.modes[j]) << '\n';
  }
  return os.str();
}

Trajectory parse_trajectory_csv(std::string_view csv, double t0) {
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("trajectory CSV: missing header");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 6) throw ConfigError("trajectory CSV: header has too few columns");
  const std::size_t dim = columns - 3;  // t, dpgen_total, mode

  Trajectory traj;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
    if (fields.size() != columns) {
      throw ConfigError("trajectory CSV: row " + std::to_string(row) + " has " +
                        std::to_string(fields.size()) + " fields");
    }
    std::vector<double> values(dim);
    for (std::size_t i = 0; i < dim; ++i) values[i] = std::stod(fields[1 + i]);
    const OperatingMode mode =
        fields.back() == "support" ? OperatingMode::Support : OperatingMode::Mppt;
    traj.push_back(std::stod(fields[0]) - t0, SystemState::from_values(std::move(values)),
                   std::stod(fields[columns - 2]), mode);
  }
  return traj;
}

std::string decision_json(const RunReport& report, bool emit_timings) {
  return decision_object(report, emit_timings).dump(2) + "\n";
}

std::string decisions_json(std::span<const RunReport> reports, bool emit_timings) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : reports) arr.push_back(decision_object(r, emit_timings));
  return arr.dump(2) + "\n";
}

namespace {

void check_one(const ordered_json& o, const std::string& where, std::vector<std::string>& errs) {
  auto fail = [&](const std::string& msg) { errs.push_back(where + ": " + msg); };
  if (!o.is_object()) {
    fail("expected an object");
    return;
  }
  auto string_in = [&](const char* key, std::initializer_list<std::string_view> allowed) {
    if (!o.contains(key) || !o[key].is_string()) {
      fail(std::string("'") + key + "' must be a string");
      return std::string();
    }
    const auto v = o[key].get<std::string>();
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      fail(std::string("'") + key + "' has unexpected value '" + v + "'");
    }
    return v;
  };
  auto nullable_number = [&](const char* key, bool required) {
    if (!o.contains(key)) {
      if (required) fail(std::string("missing '") + key + "'");
      return false;
    }
    if (o[key].is_null()) return false;
    if (!o[key].is_number() || !std::isfinite(o[key].get<double>())) {
      fail(std::string("'") + key + "' must be a finite number or null");
      return false;
    }
    return true;
  };

  const auto strategy = string_in("strategy", {"deadband", "critical", "predictive"});
  const auto decision = string_in("decision", {"mppt", "support"});
  string_in("trigger", {"below-threshold", "above-threshold", "predicted-safe", "predicted-unsafe"});
  const bool has_pred = nullable_number("predicted_nadir_hz", true);
  const bool has_violation = nullable_number("first_violation_time_s", true);
  const bool has_switch = nullable_number("switch_time_s", true);
  const bool has_clock = nullable_number("wall_clock_us", true);
  nullable_number("nadir_hz", false);
  nullable_number("nadir_time_s", false);
  nullable_number("critical_width_hz", false);

  if (has_pred != (strategy == "predictive")) {
    fail("'predicted_nadir_hz' must be present exactly for the predictive strategy");
  }
  if (has_violation != (strategy == "predictive" && decision == "support")) {
    fail("'first_violation_time_s' must be present exactly for a predictive support verdict");
  }
  if (has_switch != (decision == "support")) {
    fail("'switch_time_s' must be present exactly when the decision is support");
  }
  if (has_clock && o["wall_clock_us"].get<double>() < 0.0) fail("'wall_clock_us' is negative");
}

}  // namespace

std::vector<std::string> check_decision_json(std::string_view text) {
  std::vector<std::string> errs;
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    errs.push_back(std::string("not valid JSON: ") + e.what());
    return errs;
  }
  if (doc.is_array()) {
    for (std::size_t i = 0; i < doc.size(); ++i) check_one(doc[i], "[" + std::to_string(i) + "]", errs);
  } else {
    check_one(doc, "decision", errs);
  }
  return errs;
}

ComparisonTable compare_report(std::span<const RunReport> reports) {
  ComparisonTable table;
  for (const auto& r : reports) {
    table.rows.push_back({r.strategy, r.switched(), r.switch_time(), r.nadir.drop(), r.safe});
  }
  return table;
}

std::string ComparisonTable::to_text() const {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %-9s %-16s %-16s %-5s\n", "strategy", "switched",
                "switch_time_s", "nadir_drop_hz", "safe");
  os << buf;
  for (const auto& r : rows) {
    const std::string when = r.switch_time ? format_number(*r.switch_time) : "-";
    std::snprintf(buf, sizeof buf, "%-12s %-9s %-16s %-16s %-5s\n", r.strategy.c_str(),
                  r.switched ? "yes" : "no", when.c_str(), format_number(r.nadir_drop).c_str(),
                  r.safe ? "yes" : "no");
    os << buf;
  }
  return os.str();
}

}  // namespace wtgswitch
