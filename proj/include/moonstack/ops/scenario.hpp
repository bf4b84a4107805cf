#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "moonstack/bus/bus.hpp"
#include "moonstack/kin/kinematics.hpp"
#include "moonstack/model/description.hpp"
#include "moonstack/model/roles.hpp"
#include "moonstack/stack/operator_node.hpp"

namespace moonstack::ops {

struct LinkSpec {
  std::string a;
  std::string b;
  bus::LinkCondition condition;
  bus::Direction direction = bus::Direction::both;
};

struct Parameters {
  double delta_e = 0.05;
  double delta_offset = 0.3;
  double timeout = 0.3;
  double tick = 0.02;
};

struct CrashSpec {
  std::string node;
  double t = 0.0;
};

struct CalibrationSpec {
  std::string node;   // calibrator computer
  std::string joint;  // "limb1/joint2"
  double homing_speed = -0.05;
};

/// A graspable fixture placed in the world, optionally clamped by a gripper at start.
struct FixtureSpec {
  model::Endpoint id;
  kin::Pose pose;
  double width = 0.05;
  std::optional<model::Endpoint> held_by;
};

struct Scenario {
  std::string name;
  model::RobotDescription description;
  std::string description_ref;  // file the description came from, if any
  model::RoleTable role_table;
  std::vector<LinkSpec> link_schedule;
  std::vector<stack::InputEvent> operator_script;
  double duration = 0.0;
  std::uint64_t seed = 0;
  ctrl::StrategyKind strategy = ctrl::StrategyKind::clamped_integral;
  Parameters parameters;

  // optional extras
  std::vector<CrashSpec> crashes;
  std::map<std::string, double> initial_state;  // "limb1/joint2" -> true angle
  std::map<std::string, double> zero_offsets;   // "limb1/joint2" -> true minus sensed
  std::vector<CalibrationSpec> calibration;
  double sensor_noise = 0.0;
  std::map<std::string, double> battery_drain;      // module -> percent per second
  std::vector<model::ModuleSpec> scene_modules;     // loose modules not yet part of the robot
  std::vector<FixtureSpec> fixtures;                // world poses for graspable fixtures
  std::map<std::string, kin::Pose> limb_bases;      // world pose of each limb chain root
};

/// Parse a scenario document. A string-valued "description" is a file path
/// resolved against `base_dir`. Throws SyntaxError or ValidationError (with the
/// offending field path).
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario load_scenario(const std::filesystem::path& file);

/// Throws ValidationError when an id does not exist or a value is out of range.
void validate_scenario(const Scenario& s);

nlohmann::json scenario_to_json(const Scenario& s);

nlohmann::json pose_to_json(const kin::Pose& p);
kin::Pose pose_from_json(const nlohmann::json& j, const std::string& path);

}  // namespace moonstack::ops
