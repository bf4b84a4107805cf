#pragma once

#include <optional>

#include "moonstack/stack/messages.hpp"
#include "moonstack/stack/node.hpp"

namespace moonstack::stack {

enum class CalibrationPhase { seeking, done, halted };

std::string_view to_string(CalibrationPhase phase);

struct CalibrationState {
  std::string module;
  std::string joint;
  double homing_speed = -0.05;  // rad/s, sign picks the sweep direction
  model::Interval limits{-3.14159, 3.14159};
  std::optional<bool> reflector_last;
  double last_sensor_t = -1.0;
  CalibrationPhase phase = CalibrationPhase::seeking;
  std::optional<double> offset;  // sensed angle at the reflector's rising edge
  std::string error;
};

/// Feed one sensor message. Returns the next homing target when the message is
/// fresh and the sweep continues. One increment per fresh reading: if readings
/// stop arriving, so do targets, and the joint stops.
std::optional<double> calibrate_step(CalibrationState& state, const SensorMsg& sensor, double tick);

/// Homing routine for one joint, driven over `calib/<module>/<joint>`.
class CalibratorNode : public Node {
 public:
  CalibratorNode(std::string host, CalibrationState state, double tick = 0.02);

  model::Level level() const override { return model::Level::calibrator; }
  std::vector<std::string> subscriptions() const override;
  void receive(const bus::Envelope& envelope, double now) override;
  void tick(double now, TickOutput& out) override;

  const CalibrationState& state() const { return state_; }

 private:
  CalibrationState state_;
  double tick_;
  std::optional<double> next_;
  bool reported_ = false;
};

/// Wheel computer: forwards `wheel/<module>/speed` straight to the motors. No
/// watchdog, so a wheel keeps its last speed when the link drops.
class WheelNode : public Node {
 public:
  WheelNode(std::string host, std::string module);

  model::Level level() const override { return model::Level::wheel_direct; }
  std::vector<std::string> subscriptions() const override { return {topic::wheel_speed(module_)}; }
  void receive(const bus::Envelope& envelope, double now) override;
  void tick(double now, TickOutput& out) override;

 private:
  std::string module_;
  std::optional<WheelSpeedMsg> last_;
};

}  // namespace moonstack::stack
