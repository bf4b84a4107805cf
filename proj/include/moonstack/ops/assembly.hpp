#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "moonstack/ops/world.hpp"

namespace moonstack::ops {

/// Joint configuration at which the free gripper meets the wheel's fixture.
kin::JointVector assembly_reference_q();

struct AssemblyOptions {
  Eigen::Vector3d fixture_offset = Eigen::Vector3d::Zero();  // move the wheel off its scripted pose
  std::uint64_t seed = 42;
};

struct AssemblyResult {
  RunRecord record;
  bool attached = false;          // gripper1 holds the wheel fixture at the end
  bool released = false;          // gripper2 let go of the palette
  std::optional<double> grasp_time;
  bool matches_minimal = false;   // re-derived description has the Minimal structure
  int motor_count = 0;
  bool neighbor_in_telemetry = false;
  std::string diagnostic;         // empty on success
};

/// Palette-mounted limb plus a loose wheel: zero-pose init, IK approach to the
/// wheel fixture, close the free gripper until the IR handshake confirms the
/// connection, then open the palette gripper. The release is only sent after
/// the grasp is confirmed.
Scenario assembly_scenario_spec(const AssemblyOptions& options = {});
AssemblyResult assembly_scenario(const AssemblyOptions& options = {});
/// Run record files plus assembly.json.
void write_assembly(const AssemblyResult& result, const std::filesystem::path& dir);

}  // namespace moonstack::ops
