#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "moonstack/error.hpp"
#include "moonstack/model/presets.hpp"
#include "moonstack/ops/assembly.hpp"
#include "moonstack/ops/figures.hpp"
#include "moonstack/ops/telemetry.hpp"
#include "moonstack/ops/world.hpp"

using namespace moonstack;
using namespace moonstack::ops;
using nlohmann::json;

namespace {

json minimal_doc() {
  json d;
  d["name"] = "minimal-drive";
  d["description"] = json::parse(model::serialize_description(model::minimal()));
  d["role_table"] = {{"limb1-pc", {{"levels", {1, 2, 3}}, {"module", "limb1"}}},
                     {"wheel1-pc", {{"levels", {"wheel-direct"}}, {"module", "wheel1"}}},
                     {"mission", {{"levels", {4, "mission-control"}}}},
                     {"operator-A", {{"levels", {5}}}}};
  d["link_schedule"] = json::array({{{"a", "operator-A"}, {"b", "limb1-pc"}, {"latency", 0.01}, {"jitter", 0.03},
                                     {"drop_rate", 0.2}, {"jitter_seed", 5}, {"outages", {{2.0, 2.4}}}}});
  d["operator_script"] = json::array({{{"t", 0.2}, {"operator", "operator-A"}, {"op", "down"}, {"target", "limb1/joint2"}, {"speed", 0.3}},
                                      {{"t", 3.0}, {"operator", "operator-A"}, {"op", "up"}, {"target", "limb1/joint2"}}});
  d["duration"] = 4.0;
  d["seed"] = 9;
  d["strategy"] = "clamped";
  return d;
}

std::string error_path(const json& doc) {
  try {
    parse_scenario(doc.dump());
  } catch (const ValidationError& e) {
    return e.path();
  }
  return "<accepted>";
}

std::string log_text(const RunRecord& r) {
  std::ostringstream os;
  bus::write_delivery_log(os, r.delivery_log);
  return os.str();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("scenario parses and round-trips") {
  auto s = parse_scenario(minimal_doc().dump());
  CHECK(s.description == model::minimal());
  CHECK(s.role_table.size() == 4);
  REQUIRE(s.link_schedule.size() == 1);
  CHECK(s.link_schedule[0].condition.connected_intervals ==
        std::vector<bus::Window>{{0.0, 2.0}, {2.4, bus::kForever}});
  CHECK(s.operator_script.size() == 2);
  CHECK(s.strategy == ctrl::StrategyKind::clamped_integral);
  auto again = parse_scenario(scenario_to_json(s).dump());
  CHECK(scenario_to_json(again) == scenario_to_json(s));
}

TEST_CASE("scenario validation names the offending field") {
  auto d = minimal_doc();
  d["duration"] = 0.0;
  CHECK(error_path(d) == "duration");

  d = minimal_doc();
  d["link_schedule"][0]["b"] = "nobody";
  CHECK(error_path(d) == "link_schedule[0].b");

  d = minimal_doc();
  d["operator_script"][1]["operator"] = "limb1-pc";
  CHECK(error_path(d) == "operator_script[1].operator");

  d = minimal_doc();
  d["operator_script"][0]["target"] = "limb9/joint1";
  CHECK(error_path(d) == "operator_script[0].target");

  d = minimal_doc();
  d["link_schedule"][0]["drop_rate"] = 1.5;
  CHECK(error_path(d) == "link_schedule[0].drop_rate");

  d = minimal_doc();
  d["parameters"] = {{"tick", -0.02}};
  CHECK(error_path(d) == "parameters.tick");

  d = minimal_doc();
  d["strategy"] = "telepathy";
  CHECK(error_path(d) == "strategy");

  d = minimal_doc();
  d.erase("role_table");
  CHECK(error_path(d) == "role_table");

  CHECK_THROWS_AS(parse_scenario("{\"duration\": 1,"), SyntaxError);
}

TEST_CASE("same seed gives the same hash and delivery log") {
  auto s = parse_scenario(minimal_doc().dump());
  auto a = run_scenario(s);
  auto b = run_scenario(s);
  CHECK(a.final_hash.size() == 16);
  CHECK(a.final_hash == b.final_hash);
  CHECK(log_text(a) == log_text(b));
  CHECK(a.delivery_log.size() > 100);
  // a different jitter seed changes the delivery times
  auto d = minimal_doc();
  d["link_schedule"][0]["jitter_seed"] = 6;
  auto c = run_scenario(parse_scenario(d.dump()));
  CHECK(log_text(c) != log_text(a));
}

TEST_CASE("every joint is still once the script is over") {
  auto s = parse_scenario(minimal_doc().dump());
  s.duration = 3.0 + s.parameters.timeout + 3 * s.parameters.tick;
  World w(s);
  auto r = w.run();
  for (const auto& [key, j] : w.plant().joints()) CHECK(j.velocity == 0.0);
  CHECK(r.violations.empty());
}

TEST_CASE("run record files") {
  auto s = parse_scenario(minimal_doc().dump());
  s.duration = 1.2;
  auto r = run_scenario(s);
  auto dir = std::filesystem::temp_directory_path() / "moonstack_record_test";
  std::filesystem::remove_all(dir);
  r.write(dir);
  for (const char* f : {"delivery.jsonl", "truth.jsonl", "commands.csv", "telemetry.jsonl", "events.jsonl", "mission.csv",
                        "summary.json"})
    CHECK(std::filesystem::exists(dir / f));
  auto summary = json::parse(slurp(dir / "summary.json"));
  CHECK(summary["final_hash"] == r.final_hash);
  CHECK(summary["final_motor_count"] == 11);
  std::filesystem::remove_all(dir);
}

// ---- telemetry ----

TEST_CASE("telemetry frames round-trip") {
  TelemetryFrame f;
  f.t = 3.0;
  f.node = "limb1-pc";
  f.battery = 97.5;
  f.joints["joint1"] = {0.25, -0.1};
  f.neighbors = {"wheel1"};
  f.events.push_back({2.5, "limb1-pc", "silence-hold", "limb1/joint1"});
  CHECK(telemetry_from_json(to_json(f)) == f);
}

TEST_CASE("healthy run has no stale nodes") {
  auto s = parse_scenario(minimal_doc().dump());
  s.link_schedule.clear();
  auto r = run_scenario(s);
  REQUIRE(r.mission_table.size() == 4);
  for (const auto& row : r.mission_table) CHECK_FALSE(row.stale);
}

TEST_CASE("a crashed node goes stale three seconds after its last frame") {
  auto s = parse_scenario(minimal_doc().dump());
  s.link_schedule.clear();
  s.crashes.push_back({"wheel1-pc", 5.0});
  s.duration = 8.0;
  World w(s);
  auto r = w.run();
  for (const auto& row : r.mission_table) CHECK(row.stale == (row.frame.node == "wheel1-pc"));
  // last frame at 4 s: still fresh at 7 s, stale just after
  TelemetryAggregator agg;
  for (const auto& f : r.telemetry) agg.add(f);
  for (const auto& row : agg.table(7.0)) CHECK_FALSE(row.stale);
  for (const auto& row : agg.table(7.02))
    if (row.frame.node == "wheel1-pc") CHECK(row.stale);
}

TEST_CASE("link quality reflects the drop rate") {
  auto s = parse_scenario(minimal_doc().dump());
  s.link_schedule.clear();
  for (const char* peer : {"mission", "operator-A", "wheel1-pc"}) {
    LinkSpec l{"limb1-pc", peer, {}};
    l.condition.drop_rate = 0.5;
    l.condition.jitter_seed = 3;
    s.link_schedule.push_back(l);
  }
  s.duration = 6.0;
  auto r = run_scenario(s);
  int frames = 0;
  for (const auto& f : r.telemetry) {
    if (f.node != "limb1-pc" || f.t < 3.0) continue;
    ++frames;
    CHECK(f.link_quality == doctest::Approx(0.5).epsilon(0.2));
  }
  CHECK(frames >= 3);
}

// ---- figures ----

TEST_CASE("strategy comparison CSVs are byte-stable") {
  auto a = fig13_suite();
  auto b = fig13_suite();
  CHECK(a.summary_csv == b.summary_csv);
  CHECK(a.trace_csv == b.trace_csv);
  CHECK(a.trace_csv.size() == 4);
  CHECK(a.rows.size() == 4);
  CHECK(std::isnan(a.rows[0].reconnect_jump));
  auto dir = std::filesystem::temp_directory_path() / "moonstack_fig13_test";
  std::filesystem::remove_all(dir);
  write_fig13(a, dir);
  CHECK(slurp(dir / "fig13_summary.csv") == a.summary_csv);
  CHECK(std::filesystem::exists(dir / "fig13_clamped.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("three brief taps advance 0.03 rad") {
  Fig14Script script;
  script.long_press = 0.0;
  script.taps = 3;
  auto r = fig14_task(script);
  const double quantum = script.tap_speed * 0.02;
  CHECK(std::abs(r.final_angle - r.start - 0.03) <= quantum + 1e-12);
  for (double a : r.tap_advances) CHECK(std::abs(a - 0.01) <= quantum + 1e-12);
}

TEST_CASE("no taps, no motion") {
  Fig14Script script;
  script.long_press = 0.0;
  script.taps = 0;
  auto r = fig14_task(script);
  CHECK(r.final_angle == r.start);
}

TEST_CASE("fine placement approaches its goal monotonically") {
  auto r = fig14_task();
  CHECK(r.monotone);
  CHECK(r.tap_advances.size() == 6);
  CHECK(r.final_error <= 0.05);
  for (double a : r.tap_advances) CHECK(a == doctest::Approx(0.01).epsilon(0.2));
}

// ---- assembly ----

TEST_CASE("assembly ends as the Minimal robot") {
  auto r = assembly_scenario();
  INFO(r.diagnostic);
  CHECK(r.grasp_time.has_value());
  CHECK(r.attached);
  CHECK(r.released);
  CHECK(r.matches_minimal);
  CHECK(r.motor_count == 11);
  CHECK(r.neighbor_in_telemetry);
  CHECK(r.diagnostic.empty());
  CHECK(r.record.violations.empty());
}

TEST_CASE("assembly with the wheel 10 cm off script fails with a diagnostic") {
  AssemblyOptions o;
  o.fixture_offset = Eigen::Vector3d(0.0, 0.1, 0.0);
  auto r = assembly_scenario(o);
  CHECK_FALSE(r.grasp_time.has_value());
  CHECK_FALSE(r.attached);
  CHECK_FALSE(r.released);
  CHECK_FALSE(r.matches_minimal);
  CHECK(r.diagnostic.find("grasp failed") != std::string::npos);
}

TEST_CASE("assembly IR timeline is reproducible") {
  auto a = assembly_scenario();
  auto b = assembly_scenario();
  REQUIRE(a.record.ir.size() == b.record.ir.size());
  for (std::size_t i = 0; i < a.record.ir.size(); ++i) {
    CHECK(a.record.ir[i].t == b.record.ir[i].t);
    CHECK(a.record.ir[i].from_module == b.record.ir[i].from_module);
    CHECK(a.record.ir[i].neighbors == b.record.ir[i].neighbors);
  }
  CHECK(a.record.final_hash == b.record.final_hash);
}

TEST_CASE("built-in scenarios survive a JSON round trip") {
  for (const auto& s : {assembly_scenario_spec(), fig13_scenario(ctrl::StrategyKind::offset), fig14_scenario({})}) {
    auto again = parse_scenario(scenario_to_json(s).dump());
    CHECK(scenario_to_json(again) == scenario_to_json(s));
    CHECK(run_scenario(again).final_hash == run_scenario(s).final_hash);
  }
}

TEST_CASE("structure comparison ignores names") {
  auto a = model::minimal();
  auto b = a;
  b.name = "renamed";
  CHECK(same_structure(a, b));
  CHECK_FALSE(same_structure(a, model::vehicle()));
}
