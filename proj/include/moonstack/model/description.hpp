#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace moonstack::model {

enum class JointKind { revolute, prismatic };
enum class ModuleKind { limb, wheel, body, gripper_tool };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double x) const { return x >= lo && x <= hi; }
  double clamp(double x) const { return x < lo ? lo : (x > hi ? hi : x); }
  bool operator==(const Interval&) const = default;
};

struct JointSpec {
  std::string name;
  std::array<double, 3> axis{0.0, 0.0, 1.0};
  JointKind kind = JointKind::revolute;
  Interval limits{-3.14159, 3.14159};
  double v_max = 0.0;        // rad/s or m/s
  double link_length = 0.0;  // distance along local x to the next joint frame

  bool operator==(const JointSpec&) const = default;
};

struct ModuleSpec {
  std::string id;
  ModuleKind kind = ModuleKind::limb;
  std::vector<JointSpec> joints;
  std::vector<std::string> fixtures;
  int motor_count = 0;

  bool operator==(const ModuleSpec&) const = default;
};

/// One end of an attachment, written "module.port" in documents.
struct Endpoint {
  std::string module;
  std::string port;

  std::string str() const { return module + "." + port; }
  bool operator==(const Endpoint&) const = default;
};

struct Attachment {
  Endpoint gripper;
  Endpoint fixture;

  bool operator==(const Attachment&) const = default;
};

/// Serial chain from a root frame to a tip frame. The root frame is offset from the
/// first joint by `base_offset` metres along x.
struct KinematicChain {
  std::string module;
  std::string root_frame;
  std::vector<JointSpec> joints;
  std::string tip_frame;
  double base_offset = 0.0;

  std::size_t size() const { return joints.size(); }
  double reach() const;
  bool operator==(const KinematicChain&) const = default;
};

struct RobotDescription {
  std::string name;
  std::vector<ModuleSpec> modules;
  std::vector<Attachment> attachments;
  std::optional<Endpoint> root;  // palette anchor, when the assembly is mounted
  std::vector<KinematicChain> chains;

  const ModuleSpec* find_module(std::string_view id) const;
  const KinematicChain* find_chain(std::string_view module_id) const;
  bool operator==(const RobotDescription&) const = default;
};

// Hardware constants of the reference modules.
inline constexpr double kLimbJointSpeed = 5.4 * 2.0 * 3.14159265358979323846 / 60.0;  // 5.4 rpm
inline constexpr double kLimbLength = 1.55;
inline constexpr int kLimbJoints = 7;
inline constexpr int kLimbMotors = 9;  // 7 joints + 2 grippers
inline constexpr int kWheelMotors = 2;
inline constexpr int kBodyFixtures = 4;
inline constexpr int kGripperToolMotors = 1;

std::string_view to_string(ModuleKind kind);
std::string_view to_string(JointKind kind);
int default_motor_count(ModuleKind kind);

/// Roll-pitch-roll-pitch-roll-pitch-roll limb whose links sum to 1.55 m.
std::vector<JointSpec> canonical_limb_joints();
ModuleSpec make_limb(std::string id);
ModuleSpec make_wheel(std::string id, std::vector<std::string> fixtures = {"fixture1", "fixture2"});
ModuleSpec make_body(std::string id);

/// Parse a JSON description, validate it and derive its kinematic chains.
/// Throws SyntaxError or ValidationError.
RobotDescription parse_description(std::string_view text);

/// Validate modules/attachments of an in-memory description and (re)derive chains.
RobotDescription finalize_description(RobotDescription desc);

std::string serialize_description(const RobotDescription& desc);

int motor_count(const RobotDescription& desc);

Endpoint parse_endpoint(std::string_view text);

}  // namespace moonstack::model
