#include "moonstack/ctrl/local_controller.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace moonstack::ctrl {

LocalJointState local_joint_step(const LocalJointState& state, const CommandOut& command,
                                 const model::Interval& limits, double v_max, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("local_joint_step: dt must be positive");
  double next = state.angle;
  if (command.kind == CommandKind::position) {
    double target = limits.clamp(command.value);
    double error = target - state.angle;
    double travel = std::min(v_max * dt, std::abs(error));
    next = state.angle + (error < 0.0 ? -travel : travel);
    if (std::abs(error) <= v_max * dt) next = target;
  } else {
    double v = std::clamp(command.value, -v_max, v_max);
    next = limits.clamp(state.angle + v * dt);
  }
  return {next, (next - state.angle) / dt};
}

}  // namespace moonstack::ctrl
