#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "moonstack/ops/world.hpp"

namespace moonstack::ops {

// Shared script of the strategy comparison: one joint, one operator, one
// connection trace with a short loss while a key is held.
inline constexpr double kFig13LossStart = 1.0;
inline constexpr double kFig13LossEnd = 1.3;
inline constexpr double kFig13Duration = 7.5;
inline constexpr double kFig13Speed = 0.4;
inline constexpr const char* kFig13Joint = "limb1/joint1";

struct Press {
  double down = 0.0;
  double up = 0.0;
  double speed = 0.0;
};

std::vector<Press> fig13_presses();
Scenario fig13_scenario(ctrl::StrategyKind strategy);

struct Fig13Row {
  ctrl::StrategyKind strategy = ctrl::StrategyKind::clamped_integral;
  bool moved_during_loss = false;
  double reconnect_jump = 0.0;  // NaN for the speed strategy, which sends no positions
  double final_error = 0.0;     // against the target integrated over connected time
  double max_command_gap = 0.0;  // max |u_k - y_k| over position commands
  std::vector<double> press_displacements;
};

struct Fig13Result {
  std::vector<RunRecord> runs;  // speed, integral, offset, clamped
  std::vector<Fig13Row> rows;
  std::map<std::string, std::string> trace_csv;  // per strategy
  std::string summary_csv;
};

/// Metrics of one run of the shared script.
Fig13Row fig13_metrics(const Scenario& s, const RunRecord& r);
Fig13Result fig13_suite();
/// fig13_<strategy>.csv and fig13_summary.csv.
void write_fig13(const Fig13Result& result, const std::filesystem::path& dir);

// Fine placement: one long press at full speed, then brief taps.
struct Fig14Script {
  double long_press = 2.0;  // s at v_max; 0 for none
  int taps = 6;
  double tap_duration = 0.1;
  double tap_speed = 0.1;
  double tap_spacing = 0.5;
};

struct Fig14Result {
  RunRecord record;
  double goal = 0.0;  // start + integral of the operator target
  double start = 0.0;
  double final_angle = 0.0;
  double final_error = 0.0;
  std::vector<double> tap_advances;
  bool monotone = true;  // never moves away from the goal
  std::string trace_csv;
  std::string report;
};

Scenario fig14_scenario(const Fig14Script& script);
Fig14Result fig14_task(const Fig14Script& script = {});
/// fig14_trace.csv and fig14_report.txt.
void write_fig14(const Fig14Result& result, const std::filesystem::path& dir);

/// Truth angle of `joint` at every tick of a record, indexed by tick number.
std::vector<double> truth_series(const RunRecord& r, const std::string& joint, double tick);

}  // namespace moonstack::ops
