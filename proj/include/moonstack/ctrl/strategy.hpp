#pragma once

#include <optional>
#include <string_view>

#include "moonstack/error.hpp"

namespace moonstack::ctrl {

// Remote joint controllers. They run on the operator side and turn a velocity
// target from the operator into the command sent to the joint's local controller:
//
//   speed             u'_k = r'_k
//   integral          u_k  = u_{k-1} + r'_k (t_k - t_{k-1})
//   offset            u_k  = y_k + sign(r'_k) delta_offset
//   clamped integral  u_k  = clamp(u_{k-1} + r'_k (t_k - t_{k-1}), y_k - delta_e, y_k + delta_e)
//
// None of them looks at peer liveness: the input carries no connection state.

enum class StrategyKind { speed, integral, offset, clamped_integral };

std::string_view to_string(StrategyKind kind);
StrategyKind parse_strategy(std::string_view text);

enum class CommandKind { position, velocity };

struct CommandOut {
  CommandKind kind = CommandKind::position;
  double value = 0.0;

  bool operator==(const CommandOut&) const = default;
};

struct StrategyInput {
  double t = 0.0;      // s
  double y = 0.0;      // latest sensor reading, rad
  double r_dot = 0.0;  // operator velocity target, rad/s
};

struct StrategyParams {
  double delta_e = 0.05;
  double delta_offset = 0.3;
};

struct StrategyState {
  StrategyKind kind = StrategyKind::clamped_integral;
  double u_prev = 0.0;
  double t_prev = 0.0;
  double delta_offset = 0.3;
  double delta_e = 0.05;
  // Offset strategy: target computed on the first tick of a press, kept until the
  // direction changes.
  std::optional<double> offset_target;
  int offset_sign = 0;
};

class TimeOrderError : public Error {
 public:
  TimeOrderError(double t_prev, double t);
};

/// Fresh state with the command aligned on the sensed position `y0` at time `t0`.
/// Throws ValidationError when a threshold is not positive.
StrategyState make_strategy(StrategyKind kind, double y0, double t0, const StrategyParams& params = {});

CommandOut step_speed(StrategyState& state, const StrategyInput& in);
CommandOut step_integral(StrategyState& state, const StrategyInput& in);
CommandOut step_offset(StrategyState& state, const StrategyInput& in);
CommandOut step_clamped(StrategyState& state, const StrategyInput& in);

/// Dispatch on `state.kind`.
CommandOut step(StrategyState& state, const StrategyInput& in);

}  // namespace moonstack::ctrl
