#pragma once

#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "moonstack/ctrl/local_controller.hpp"
#include "moonstack/kin/kinematics.hpp"
#include "moonstack/model/description.hpp"

namespace moonstack::plant {

inline constexpr double kReflectorWidth = 0.02;
inline constexpr double kGripperMaxOpening = 0.080;
inline constexpr double kGripperSpeed = 0.009;
inline constexpr double kWheelRadius = 0.24;
inline constexpr double kWheelTrack = 0.638;
inline constexpr double kFixtureWidth = 0.05;
inline constexpr double kGraspPositionTol = 0.02;
inline constexpr double kGraspAngleTol = 0.1;

/// Photo-reflector lit while the true joint angle lies in [lo, hi).
struct Reflector {
  double lo = -kReflectorWidth / 2;
  double hi = kReflectorWidth / 2;

  bool lit(double angle) const { return angle >= lo && angle < hi; }
};

struct JointPlant {
  std::string module;
  std::string name;
  double angle = 0.0;  // ground truth
  double velocity = 0.0;
  double v_max = model::kLimbJointSpeed;
  model::Interval limits{-3.14159, 3.14159};
  double zero_offset = 0.0;  // true angle = sensed angle + zero_offset
  Reflector reflector;
  ctrl::CommandOut setpoint{ctrl::CommandKind::position, 0.0};  // held by the local controller, sensed frame

  double sensed() const { return angle - zero_offset; }
  std::string key() const { return module + "/" + name; }
};

struct GripperPlant {
  model::Endpoint id;
  double opening = kGripperMaxOpening;
  double speed = kGripperSpeed;
  bool closing = false;
  std::optional<model::Endpoint> grasped_fixture;
};

struct FixturePlant {
  model::Endpoint id;
  kin::Pose pose;  // world frame; a gripper tip must match it to grasp
  double width = kFixtureWidth;
  std::optional<model::Endpoint> attached_gripper;
};

struct PlanarPose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
};

struct WheelPlant {
  std::string module;
  double left_speed = 0.0;   // rad/s
  double right_speed = 0.0;  // rad/s
  PlanarPose pose;
  double radius = kWheelRadius;
  double track = kWheelTrack;
};

struct Battery {
  double level = 100.0;      // percent
  double drain_rate = 0.0;   // percent per second while powered

  bool offline() const { return level <= 0.0; }
};

struct SensorReading {
  std::string module;
  std::string joint;
  double t = 0.0;
  double angle = 0.0;  // sensed frame
  double velocity = 0.0;
  bool reflector = false;
};

/// Optical identity exchange between a gripper and a fixture (or a Body relaying its neighbours).
struct IrMessage {
  double t = 0.0;
  std::string from_module;
  std::string to_module;
  std::vector<std::string> neighbors;
};

/// Differential-drive update: v = r (wl + wr) / 2, w = r (wr - wl) / track, integrated along the arc.
PlanarPose wheel_step(WheelPlant& wheel, double left_cmd, double right_cmd, double dt);

struct GraspEvent {
  std::optional<model::Endpoint> fixture;
  std::optional<IrMessage> ir;
};

/// Advance one closing/opening gripper. When closing on an aligned fixture the
/// gripper latches onto it as soon as its opening reaches the fixture width.
GraspEvent grasp_detect(GripperPlant& gripper, const kin::Pose& tip, std::vector<FixturePlant>& fixtures, double dt,
                        double t);

/// Truth model of every simulated module.
class Plant {
 public:
  Plant() = default;
  /// Joints of every limb chain, one battery per module, grippers for every limb,
  /// a fixture per listed fixture id, and wheels.
  explicit Plant(const model::RobotDescription& desc, std::uint64_t seed = 0);

  std::map<std::string, JointPlant>& joints() { return joints_; }
  const std::map<std::string, JointPlant>& joints() const { return joints_; }
  JointPlant& joint(const std::string& module, const std::string& name);
  const JointPlant& joint(const std::string& module, const std::string& name) const;

  std::map<std::string, WheelPlant>& wheels() { return wheels_; }
  std::map<std::string, Battery>& batteries() { return batteries_; }
  const std::map<std::string, Battery>& batteries() const { return batteries_; }
  std::vector<GripperPlant>& grippers() { return grippers_; }
  const std::vector<GripperPlant>& grippers() const { return grippers_; }
  std::vector<FixturePlant>& fixtures() { return fixtures_; }
  const std::vector<FixturePlant>& fixtures() const { return fixtures_; }

  GripperPlant* gripper(const model::Endpoint& id);
  FixturePlant* fixture(const model::Endpoint& id);
  /// Fixture that starts out clamped by `gripper` (e.g. the launch-lock palette).
  void add_fixture(FixturePlant fixture, std::optional<model::Endpoint> held_by = std::nullopt);

  /// World pose of each limb chain's root frame; limbs without one cannot grasp.
  void place_limb(const std::string& module, const kin::Pose& base, model::KinematicChain chain);
  std::optional<kin::Pose> tip_pose(const std::string& module) const;

  void set_sensor_noise(double amplitude) { noise_ = amplitude; }

  /// Local controller setpoint, sensed frame.
  void command(const std::string& module, const std::string& joint, const ctrl::CommandOut& cmd);
  void command_gripper(const model::Endpoint& id, bool close);
  void command_wheel(const std::string& module, double left, double right);

  /// Advance everything by dt. Returns sensor readings stamped `t` for modules
  /// whose battery is not empty. IR exchanges are appended to `ir`.
  std::vector<SensorReading> step(double dt, double t, std::vector<IrMessage>* ir = nullptr);

  /// Sensor readings without advancing.
  std::vector<SensorReading> sense(double t);

  const std::set<std::string>& neighbors(const std::string& module) const;

 private:
  void link(const std::string& a, const std::string& b, double t, std::vector<IrMessage>* ir);
  void unlink(const std::string& a, const std::string& b);

  std::map<std::string, JointPlant> joints_;
  std::map<std::string, WheelPlant> wheels_;
  std::map<std::string, Battery> batteries_;
  std::map<std::string, model::ModuleKind> kinds_;
  std::vector<GripperPlant> grippers_;
  std::vector<FixturePlant> fixtures_;
  std::map<std::string, std::pair<kin::Pose, model::KinematicChain>> placements_;
  std::map<std::string, std::set<std::string>> neighbors_;
  double noise_ = 0.0;
  std::mt19937_64 rng_;
};

}  // namespace moonstack::plant
