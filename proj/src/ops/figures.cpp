#include "moonstack/ops/figures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>

#include <fmt/format.h>

#include "moonstack/error.hpp"
#include "moonstack/model/presets.hpp"

namespace moonstack::ops {

namespace {

using model::Level;

model::RoleTable single_joint_roles() {
  return {{"limb1-pc", {{Level::joint, Level::ik, Level::limb}, "limb1"}}, {"operator-A", {{Level::operator_}, ""}}};
}

void script_presses(Scenario& s, const std::vector<Press>& presses, const std::string& target) {
  for (const auto& p : presses) {
    stack::InputEvent down;
    down.t = p.down;
    down.op_id = "operator-A";
    down.op = stack::InputOp::down;
    down.target = target;
    down.speed = p.speed;
    stack::InputEvent up = down;
    up.t = p.up;
    up.op = stack::InputOp::up;
    up.speed = 0.0;
    s.operator_script.push_back(down);
    s.operator_script.push_back(up);
  }
  std::stable_sort(s.operator_script.begin(), s.operator_script.end(),
                   [](const auto& a, const auto& b) { return a.t < b.t; });
}

std::size_t tick_index(double t, double tick) { return static_cast<std::size_t>(std::llround(t / tick)); }

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

// Displacement over each press, measured from its press to the next one (or the end).
std::vector<double> press_displacements(const std::vector<Press>& presses, const std::vector<double>& theta,
                                        double tick) {
  std::vector<double> out;
  for (std::size_t i = 0; i < presses.size(); ++i) {
    std::size_t a = tick_index(presses[i].down, tick);
    std::size_t b = i + 1 < presses.size() ? tick_index(presses[i + 1].down, tick) : theta.size() - 1;
    out.push_back(theta.at(b) - theta.at(a));
  }
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (double x : v) s += (s.empty() ? "" : ";") + fmt::format("{:.9f}", x);
  return s;
}

std::string trace_csv(const RunRecord& r, const std::string& joint, const std::vector<double>& theta, double tick,
                      const std::function<bool(double)>& connected) {
  std::string out = "t,connected,r_dot,y,kind,u,angle\n";
  for (const auto& c : r.commands) {
    if (c.record.target != joint) continue;
    const auto& rec = c.record;
    out += fmt::format("{:.2f},{},{:.9f},{:.9f},{},{:.9f},{:.9f}\n", rec.t, connected(rec.t) ? 1 : 0, rec.r_dot, rec.y,
                       rec.u.kind == ctrl::CommandKind::position ? "position" : "velocity", rec.u.value,
                       theta.at(tick_index(rec.t, tick)));
  }
  return out;
}

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream os(file, std::ios::binary);
  if (!os) throw Error("cannot write '" + file.string() + "'");
  os << text;
}

}  // namespace

std::vector<double> truth_series(const RunRecord& r, const std::string& joint, double tick) {
  std::vector<double> out(tick_index(r.end_time, tick) + 1, std::numeric_limits<double>::quiet_NaN());
  for (const auto& s : r.truth)
    if (s.joint == joint) out.at(tick_index(s.t, tick)) = s.angle;
  if (out.size() > 1 && std::isnan(out[0])) out[0] = out[1];
  return out;
}

// ---- strategy comparison ----

std::vector<Press> fig13_presses() {
  return {{0.2, 1.8, kFig13Speed}, {2.8, 2.81, kFig13Speed}, {3.8, 3.9, kFig13Speed}, {4.9, 5.9, kFig13Speed}};
}

Scenario fig13_scenario(ctrl::StrategyKind strategy) {
  Scenario s;
  s.name = fmt::format("fig13-{}", ctrl::to_string(strategy));
  s.description = model::palette_limb();
  s.role_table = single_joint_roles();
  s.link_schedule.push_back({"limb1-pc", "operator-A", bus::LinkCondition::outage(kFig13LossStart, kFig13LossEnd)});
  script_presses(s, fig13_presses(), kFig13Joint);
  s.duration = kFig13Duration;
  s.seed = 13;
  s.strategy = strategy;
  return s;
}

Fig13Row fig13_metrics(const Scenario& s, const RunRecord& r) {
  const double tick = s.parameters.tick;
  auto theta = truth_series(r, kFig13Joint, tick);
  Fig13Row row;
  row.strategy = s.strategy;
  row.moved_during_loss =
      std::abs(theta.at(tick_index(kFig13LossEnd, tick)) - theta.at(tick_index(kFig13LossStart + tick, tick))) > 1e-3;

  row.reconnect_jump = std::numeric_limits<double>::quiet_NaN();
  for (const auto& c : r.commands) {
    if (c.record.target != kFig13Joint) continue;
    if (c.record.u.kind == ctrl::CommandKind::position)
      row.max_command_gap = std::max(row.max_command_gap, std::abs(c.record.u.value - c.record.y));
    if (std::isnan(row.reconnect_jump) && c.record.t >= kFig13LossEnd - 1e-9 &&
        c.record.u.kind == ctrl::CommandKind::position)
      row.reconnect_jump = std::abs(c.record.u.value - theta.at(tick_index(c.record.t, tick)));
  }

  double target = 0.0;
  for (const auto& p : fig13_presses())
    target += p.speed * (p.up - p.down - overlap(p.down, p.up, kFig13LossStart, kFig13LossEnd));
  row.final_error = std::abs(theta.back() - theta.front() - target);
  row.press_displacements = press_displacements(fig13_presses(), theta, tick);
  return row;
}

Fig13Result fig13_suite() {
  Fig13Result result;
  result.summary_csv = "strategy,moved_during_loss,reconnect_jump,final_error,max_command_gap,press_displacements\n";
  for (auto kind : {ctrl::StrategyKind::speed, ctrl::StrategyKind::integral, ctrl::StrategyKind::offset,
                    ctrl::StrategyKind::clamped_integral}) {
    auto s = fig13_scenario(kind);
    RunOptions opts;
    opts.record_log = false;
    auto r = run_scenario(s, opts);
    auto row = fig13_metrics(s, r);
    auto theta = truth_series(r, kFig13Joint, s.parameters.tick);
    auto connected = [](double t) { return !(t >= kFig13LossStart && t < kFig13LossEnd); };
    result.trace_csv[std::string(ctrl::to_string(kind))] = trace_csv(r, kFig13Joint, theta, s.parameters.tick, connected);
    result.summary_csv += fmt::format("{},{},{:.9f},{:.9f},{:.9f},{}\n", ctrl::to_string(kind), row.moved_during_loss,
                                      row.reconnect_jump, row.final_error, row.max_command_gap,
                                      join(row.press_displacements));
    result.rows.push_back(std::move(row));
    result.runs.push_back(std::move(r));
  }
  return result;
}

void write_fig13(const Fig13Result& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [name, csv] : result.trace_csv) write_text(dir / ("fig13_" + name + ".csv"), csv);
  write_text(dir / "fig13_summary.csv", result.summary_csv);
}

// ---- fine placement ----

Scenario fig14_scenario(const Fig14Script& script) {
  Scenario s;
  s.name = "fig14";
  s.description = model::palette_limb();
  s.role_table = single_joint_roles();
  s.strategy = ctrl::StrategyKind::clamped_integral;
  s.seed = 14;
  std::vector<Press> presses;
  double t = 0.2;
  if (script.long_press > 0.0) {
    presses.push_back({t, t + script.long_press, model::kLimbJointSpeed});
    t += script.long_press + 0.5;
  }
  for (int i = 0; i < script.taps; ++i, t += script.tap_spacing)
    presses.push_back({t, t + script.tap_duration, script.tap_speed});
  script_presses(s, presses, kFig13Joint);
  s.duration = t + 1.0;
  return s;
}

Fig14Result fig14_task(const Fig14Script& script) {
  auto s = fig14_scenario(script);
  const double tick = s.parameters.tick;
  Fig14Result out;
  RunOptions opts;
  opts.record_log = false;
  out.record = run_scenario(s, opts);
  auto theta = truth_series(out.record, kFig13Joint, tick);

  std::vector<Press> presses;
  for (std::size_t i = 0; i + 1 < s.operator_script.size(); i += 2)
    presses.push_back({s.operator_script[i].t, s.operator_script[i + 1].t, s.operator_script[i].speed});
  out.start = theta.front();
  out.goal = out.start;
  for (const auto& p : presses) out.goal += p.speed * (p.up - p.down);
  out.final_angle = theta.back();
  out.final_error = std::abs(out.final_angle - out.goal);

  auto advances = press_displacements(presses, theta, tick);
  std::size_t first_tap = script.long_press > 0.0 ? 1 : 0;
  out.tap_advances.assign(advances.begin() + static_cast<long>(std::min(first_tap, advances.size())), advances.end());
  for (std::size_t i = 1; i < theta.size(); ++i)
    if (std::abs(out.goal - theta[i]) > std::abs(out.goal - theta[i - 1]) + 1e-12) out.monotone = false;

  auto always = [](double) { return true; };
  out.trace_csv = trace_csv(out.record, kFig13Joint, theta, tick, always);
  out.report = fmt::format("goal {:.6f} rad\nfinal {:.6f} rad\nfinal_error {:.6f} rad\nmonotone {}\n", out.goal,
                           out.final_angle, out.final_error, out.monotone);
  for (std::size_t i = 0; i < out.tap_advances.size(); ++i)
    out.report += fmt::format("tap {} advance {:.6f} rad (expected {:.6f})\n", i + 1, out.tap_advances[i],
                              script.tap_speed * script.tap_duration);
  return out;
}

void write_fig14(const Fig14Result& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text(dir / "fig14_trace.csv", result.trace_csv);
  write_text(dir / "fig14_report.txt", result.report);
}

}  // namespace moonstack::ops
