#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moonstack/ctrl/strategy.hpp"
#include "moonstack/kin/kinematics.hpp"

// Topic names and payload codecs. Payloads are compact JSON objects.

namespace moonstack::stack {

namespace topic {
std::string cmd(std::string_view module, std::string_view joint);
std::string sensor(std::string_view module, std::string_view joint);
std::string calib(std::string_view module, std::string_view joint);
std::string wheel_speed(std::string_view module);
std::string traj(std::string_view limb);
std::string ik(std::string_view limb);
std::string grip(std::string_view module, std::string_view port);
std::string telemetry(std::string_view node);
inline constexpr std::string_view kMoverPlan = "mover/plan";

/// Splits "a/b/c" into its parts.
std::vector<std::string_view> split(std::string_view topic);
}  // namespace topic

struct JointCommandMsg {
  double t = 0.0;  // send time
  ctrl::CommandOut command;
};

struct SensorMsg {
  double t = 0.0;
  double angle = 0.0;
  double velocity = 0.0;
  bool reflector = false;
};

struct WheelSpeedMsg {
  double t = 0.0;
  double left = 0.0;
  double right = 0.0;
};

struct GripMsg {
  double t = 0.0;
  bool close = false;
};

/// Level-2 input: either a small pose displacement (linear then angular) or an
/// absolute tip pose in the chain root frame.
struct IkMsg {
  enum class Mode { nudge, target };
  double t = 0.0;
  Mode mode = Mode::nudge;
  Eigen::Matrix<double, 6, 1> nudge = Eigen::Matrix<double, 6, 1>::Zero();
  kin::Pose target;
};

struct Waypoint {
  double t = 0.0;  // seconds after the trajectory starts
  std::vector<double> q;

  bool operator==(const Waypoint&) const = default;
};

struct TrajectoryMsg {
  double t = 0.0;
  std::uint64_t id = 0;
  std::vector<std::string> joints;
  std::vector<Waypoint> waypoints;
};

struct PlanMsg {
  double t = 0.0;
  std::uint64_t id = 0;
  std::map<std::string, std::vector<double>> targets;  // limb -> joint vector in chain order
};

std::string encode(const JointCommandMsg& m);
std::string encode(const SensorMsg& m);
std::string encode(const WheelSpeedMsg& m);
std::string encode(const GripMsg& m);
std::string encode(const IkMsg& m);
std::string encode(const TrajectoryMsg& m);
std::string encode(const PlanMsg& m);

// Decoders throw moonstack::Error on malformed payloads.
JointCommandMsg decode_joint_command(std::string_view payload);
SensorMsg decode_sensor(std::string_view payload);
WheelSpeedMsg decode_wheel_speed(std::string_view payload);
GripMsg decode_grip(std::string_view payload);
IkMsg decode_ik(std::string_view payload);
TrajectoryMsg decode_trajectory(std::string_view payload);
PlanMsg decode_plan(std::string_view payload);

}  // namespace moonstack::stack
