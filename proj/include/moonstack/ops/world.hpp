#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>

#include "moonstack/bus/bus.hpp"
#include "moonstack/ops/scenario.hpp"
#include "moonstack/ops/telemetry.hpp"
#include "moonstack/plant/plant.hpp"
#include "moonstack/stack/launch.hpp"

namespace moonstack::ops {

struct TruthSample {
  double t = 0.0;
  std::string joint;  // "limb1/joint2"
  double angle = 0.0;
  double velocity = 0.0;
};

struct OperatorCommand {
  std::string op_node;
  stack::CommandRecord record;
};

/// A joint still moving longer than the silence bound after its last command.
struct SafetyViolation {
  double t = 0.0;
  std::string joint;
  double velocity = 0.0;
  double last_command = 0.0;
};

struct RunRecord {
  std::string scenario;
  double end_time = 0.0;
  std::vector<bus::Envelope> delivery_log;
  std::vector<TruthSample> truth;
  std::vector<OperatorCommand> commands;
  std::vector<TelemetryFrame> telemetry;
  std::vector<TelemetryRow> mission_table;
  std::vector<stack::Event> events;
  std::vector<plant::IrMessage> ir;
  std::vector<SafetyViolation> violations;
  std::optional<model::RobotDescription> final_description;
  std::string final_hash;  // 16 hex digits over the final plant state

  /// delivery.jsonl, truth.jsonl, commands.csv, telemetry.jsonl, events.jsonl,
  /// mission.csv and summary.json.
  void write(const std::filesystem::path& dir) const;
};

struct RunOptions {
  bool record_truth = true;
  bool record_log = true;
  bool record_commands = true;
  bool check_safety = true;
};

/// Lockstep simulation of every computer in a scenario on one simulated clock.
/// Each tick: deliver due envelopes, step the plant on the previous commands,
/// publish sensors, then tick operators, calibrators, mover, limb, IK and joint
/// nodes (delivering between groups), and finally wheels.
class World {
 public:
  explicit World(Scenario scenario, RunOptions options = {});

  void step();
  RunRecord run();
  /// Finish the record without stepping further.
  RunRecord finish();

  double now() const { return bus_.now(); }
  const Scenario& scenario() const { return scenario_; }
  plant::Plant& plant() { return plant_; }
  bus::Bus& bus() { return bus_; }
  stack::Host* host(const std::string& id);
  bool alive(const std::string& id) const;
  void crash(const std::string& id);
  /// Input from outside the script (e.g. a live console).
  void input(const std::string& op_node, stack::InputEvent ev);

  const std::map<std::string, double>& last_command_receipt() const { return last_rx_; }
  const std::vector<TelemetryFrame>& telemetry() const { return record_.telemetry; }
  const std::vector<plant::IrMessage>& ir() const { return record_.ir; }
  std::uint64_t hash() const;

 private:
  void route(const std::vector<bus::Envelope>& envelopes);
  void collect(stack::Host& host, stack::Node& node, stack::TickOutput& out);
  void emit_telemetry();
  std::string owner_of(const std::string& module) const;
  model::RobotDescription rederive() const;

  Scenario scenario_;
  RunOptions options_;
  bus::Bus bus_;
  plant::Plant plant_;
  std::vector<stack::Host> hosts_;
  std::set<std::string> dead_;
  std::map<std::string, std::string> owners_;  // module -> computer publishing its sensors
  std::map<std::string, double> last_rx_;      // "module/joint" -> last command receipt
  std::map<std::string, std::vector<stack::Event>> pending_events_;  // per host, until next frame
  std::optional<std::string> mission_;
  TelemetryAggregator aggregator_;
  long telemetry_count_ = 0;
  RunRecord record_;
};

RunRecord run_scenario(const Scenario& scenario, RunOptions options = {});

/// Same modules, attachments, root and chains; names may differ.
bool same_structure(const model::RobotDescription& a, const model::RobotDescription& b);

}  // namespace moonstack::ops
