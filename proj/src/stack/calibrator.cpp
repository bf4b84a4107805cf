#include "moonstack/stack/calibrator.hpp"

namespace moonstack::stack {

std::string_view to_string(CalibrationPhase phase) {
  switch (phase) {
    case CalibrationPhase::seeking: return "seeking";
    case CalibrationPhase::done: return "done";
    case CalibrationPhase::halted: return "halted";
  }
  return "?";
}

std::optional<double> calibrate_step(CalibrationState& s, const SensorMsg& m, double tick) {
  if (s.phase != CalibrationPhase::seeking || m.t <= s.last_sensor_t) return std::nullopt;
  s.last_sensor_t = m.t;
  bool first = !s.reflector_last.has_value();
  bool rising = m.reflector && (first || !*s.reflector_last);
  s.reflector_last = m.reflector;
  if (rising) {
    s.offset = m.angle;
    s.phase = CalibrationPhase::done;
    return std::nullopt;
  }
  double end = s.homing_speed < 0 ? s.limits.lo : s.limits.hi;
  if (std::abs(m.angle - end) <= 1e-9 || (s.homing_speed < 0 ? m.angle < end : m.angle > end)) {
    s.phase = CalibrationPhase::halted;
    s.error = "reflector-not-found";
    return std::nullopt;
  }
  return s.limits.clamp(m.angle + s.homing_speed * tick);
}

CalibratorNode::CalibratorNode(std::string host, CalibrationState state, double tick)
    : Node(std::move(host)), state_(std::move(state)), tick_(tick) {}

std::vector<std::string> CalibratorNode::subscriptions() const { return {topic::sensor(state_.module, state_.joint)}; }

void CalibratorNode::receive(const bus::Envelope& e, double) {
  if (auto target = calibrate_step(state_, decode_sensor(e.payload), tick_)) next_ = target;
}

void CalibratorNode::tick(double now, TickOutput& out) {
  if (next_) {
    out.publish(topic::calib(state_.module, state_.joint),
                encode(JointCommandMsg{now, {ctrl::CommandKind::position, *next_}}));
    next_.reset();
  }
  if (!reported_ && state_.phase != CalibrationPhase::seeking) {
    reported_ = true;
    std::string joint = state_.module + "/" + state_.joint;
    if (state_.phase == CalibrationPhase::done) {
      out.events.push_back(event(now, "calibrated", joint + " " + std::to_string(*state_.offset)));
    } else {
      out.events.push_back(event(now, state_.error, joint));
    }
  }
}

WheelNode::WheelNode(std::string host, std::string module) : Node(std::move(host)), module_(std::move(module)) {}

void WheelNode::receive(const bus::Envelope& e, double) {
  auto m = decode_wheel_speed(e.payload);
  if (!last_ || m.t >= last_->t) last_ = m;
}

void WheelNode::tick(double, TickOutput& out) {
  if (last_) out.wheels.push_back({module_, last_->left, last_->right});
}

}  // namespace moonstack::stack
