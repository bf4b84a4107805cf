// Command-line front end: scenario runs, figure reproductions, the assembly
// sequence, live mode and description validation.
#include <csignal>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "moonstack/error.hpp"
#include "moonstack/live/server.hpp"
#include "moonstack/model/presets.hpp"
#include "moonstack/ops/assembly.hpp"
#include "moonstack/ops/figures.hpp"
#include "moonstack/ops/scenario.hpp"
#include "moonstack/ops/world.hpp"

using namespace moonstack;

namespace {

live::Server* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_run(const std::string& file, const std::string& out, std::optional<std::uint64_t> seed) {
  auto s = ops::load_scenario(file);
  if (seed) s.seed = *seed;
  auto r = ops::run_scenario(s);
  r.write(out);
  fmt::print("{}: {:.2f} s, {} envelopes, {} events, {} safety violations, hash {}\n", s.name, r.end_time,
             r.delivery_log.size(), r.events.size(), r.violations.size(), r.final_hash);
  return r.violations.empty() ? 0 : 1;
}

int cmd_fig13(const std::string& out) {
  auto result = ops::fig13_suite();
  ops::write_fig13(result, out);
  std::cout << result.summary_csv;
  return 0;
}

int cmd_fig14(const std::string& out) {
  auto result = ops::fig14_task();
  ops::write_fig14(result, out);
  std::cout << result.report;
  return 0;
}

int cmd_assembly(const std::string& out, const std::vector<double>& offset) {
  ops::AssemblyOptions o;
  if (offset.size() == 3) o.fixture_offset = {offset[0], offset[1], offset[2]};
  auto r = ops::assembly_scenario(o);
  ops::write_assembly(r, out);
  if (!r.diagnostic.empty()) {
    fmt::print(stderr, "{}\n", r.diagnostic);
    return 1;
  }
  fmt::print("attached at {:.2f} s, palette released, {} motors, structure {}, IR neighbor in telemetry: {}\n",
             *r.grasp_time, r.motor_count, r.matches_minimal ? "Minimal" : "other", r.neighbor_in_telemetry);
  return 0;
}

int cmd_serve(const std::string& file, unsigned short port) {
  live::Server server(ops::load_scenario(file), port);
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  fmt::print("serving on ws://127.0.0.1:{}/\n", server.port());
  std::fflush(stdout);
  server.run();
  g_server = nullptr;
  return 0;
}

int cmd_validate(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot read '" + file + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  auto d = model::parse_description(buf.str());
  fmt::print("{}: {} modules, {} attachments, {} motors\n", d.name, d.modules.size(), d.attachments.size(),
             model::motor_count(d));
  for (const auto& c : d.chains)
    fmt::print("  chain {}: {} -> {}, {} joints, reach {:.3f} m\n", c.module, c.root_frame, c.tip_frame, c.size(),
               c.reach());
  return 0;
}

int cmd_preset(const std::string& name) {
  static const std::map<std::string, model::RobotDescription (*)()> presets = {
      {"minimal", model::minimal},   {"vehicle", model::vehicle},         {"dragon", model::dragon},
      {"tricycle", model::tricycle}, {"palette-limb", model::palette_limb}};
  auto it = presets.find(name);
  if (it == presets.end()) throw Error("unknown preset '" + name + "'");
  std::cout << model::serialize_description(it->second()) << "\n";
  return 0;
}

int cmd_scenario(const std::string& name, const std::string& strategy) {
  ops::Scenario s;
  if (name == "fig13") {
    s = ops::fig13_scenario(ctrl::parse_strategy(strategy));
  } else if (name == "fig14") {
    s = ops::fig14_scenario({});
  } else if (name == "assembly") {
    s = ops::assembly_scenario_spec();
  } else {
    throw Error("unknown built-in scenario '" + name + "'");
  }
  std::cout << ops::scenario_to_json(s).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Modular robot motion stack simulator"};
  app.require_subcommand(1);

  std::string scenario, out = "out", desc;
  std::optional<std::uint64_t> seed;
  unsigned short port = 8765;
  std::vector<double> offset;

  auto* run = app.add_subcommand("run", "Run a scenario and write its record");
  run->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory");
  run->add_option("--seed", seed, "Override the scenario seed");

  auto* fig13 = app.add_subcommand("fig13", "Compare the four remote controller strategies under link loss");
  fig13->add_option("--out", out, "Output directory");

  auto* fig14 = app.add_subcommand("fig14", "Fine placement with a long press then brief taps");
  fig14->add_option("--out", out, "Output directory");

  auto* assembly = app.add_subcommand("assembly", "Palette limb grasps a wheel and becomes the Minimal robot");
  assembly->add_option("--out", out, "Output directory");
  assembly->add_option("--fixture-offset", offset, "Move the wheel fixture off its scripted pose (x y z, m)")
      ->expected(3);

  auto* serve = app.add_subcommand("serve", "Live mode for the operator console (websocket)");
  serve->add_option("--scenario", scenario, "Scenario JSON file")->required()->check(CLI::ExistingFile);
  serve->add_option("--port", port, "TCP port");

  auto* validate = app.add_subcommand("validate", "Parse and validate a robot description");
  validate->add_option("--desc", desc, "Description JSON file")->required();

  std::string preset_name;
  auto* preset = app.add_subcommand("preset", "Print a built-in robot description as JSON");
  preset->add_option("name", preset_name, "minimal, vehicle, dragon, tricycle or palette-limb")->required();

  std::string builtin, strategy = "clamped";
  auto* export_scenario = app.add_subcommand("scenario", "Print a built-in scenario as JSON");
  export_scenario->add_option("name", builtin, "fig13, fig14 or assembly")->required();
  export_scenario->add_option("--strategy", strategy, "Strategy for fig13 (speed, integral, offset, clamped)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(scenario, out, seed);
    if (*fig13) return cmd_fig13(out);
    if (*fig14) return cmd_fig14(out);
    if (*assembly) return cmd_assembly(out, offset);
    if (*serve) return cmd_serve(scenario, port);
    if (*validate) return cmd_validate(desc);
    if (*preset) return cmd_preset(preset_name);
    if (*export_scenario) return cmd_scenario(builtin, strategy);
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return 0;
}
