#include "moonstack/ctrl/strategy.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace moonstack::ctrl {

namespace {

int sign(double x) { return (x > 0.0) - (x < 0.0); }

double elapsed(StrategyState& state, const StrategyInput& in) {
  if (!(in.t > state.t_prev)) throw TimeOrderError(state.t_prev, in.t);
  double dt = in.t - state.t_prev;
  state.t_prev = in.t;
  return dt;
}

std::string time_message(double t_prev, double t) {
  std::ostringstream os;
  os << "non-monotonic time: t_k = " << t << " after t_{k-1} = " << t_prev;
  return os.str();
}

}  // namespace

TimeOrderError::TimeOrderError(double t_prev, double t) : Error(time_message(t_prev, t)) {}

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::speed: return "speed";
    case StrategyKind::integral: return "integral";
    case StrategyKind::offset: return "offset";
    case StrategyKind::clamped_integral: return "clamped";
  }
  return "?";
}

StrategyKind parse_strategy(std::string_view text) {
  if (text == "speed") return StrategyKind::speed;
  if (text == "integral") return StrategyKind::integral;
  if (text == "offset") return StrategyKind::offset;
  if (text == "clamped" || text == "clamped_integral" || text == "clamped-integral") return StrategyKind::clamped_integral;
  throw ValidationError("strategy", "unknown strategy '" + std::string(text) + "'");
}

StrategyState make_strategy(StrategyKind kind, double y0, double t0, const StrategyParams& params) {
  if (!(params.delta_e > 0.0)) throw ValidationError("parameters.delta_e", "must be positive");
  if (!(params.delta_offset > 0.0)) throw ValidationError("parameters.delta_offset", "must be positive");
  StrategyState s;
  s.kind = kind;
  s.u_prev = y0;
  s.t_prev = t0;
  s.delta_e = params.delta_e;
  s.delta_offset = params.delta_offset;
  return s;
}

CommandOut step_speed(StrategyState& state, const StrategyInput& in) {
  state.t_prev = in.t;
  return {CommandKind::velocity, in.r_dot};
}

CommandOut step_integral(StrategyState& state, const StrategyInput& in) {
  double dt = elapsed(state, in);
  state.u_prev += in.r_dot * dt;
  return {CommandKind::position, state.u_prev};
}

CommandOut step_offset(StrategyState& state, const StrategyInput& in) {
  state.t_prev = in.t;
  int s = sign(in.r_dot);
  if (s == 0) {
    state.offset_sign = 0;
    state.u_prev = state.offset_target.value_or(in.y);
    return {CommandKind::position, state.u_prev};
  }
  if (s != state.offset_sign) {
    state.offset_target = in.y + s * state.delta_offset;
    state.offset_sign = s;
  }
  state.u_prev = *state.offset_target;
  return {CommandKind::position, state.u_prev};
}

CommandOut step_clamped(StrategyState& state, const StrategyInput& in) {
  double dt = elapsed(state, in);
  double integrated = state.u_prev + in.r_dot * dt;
  state.u_prev = std::max(in.y - state.delta_e, std::min(in.y + state.delta_e, integrated));
  return {CommandKind::position, state.u_prev};
}

CommandOut step(StrategyState& state, const StrategyInput& in) {
  switch (state.kind) {
    case StrategyKind::speed: return step_speed(state, in);
    case StrategyKind::integral: return step_integral(state, in);
    case StrategyKind::offset: return step_offset(state, in);
    case StrategyKind::clamped_integral: return step_clamped(state, in);
  }
  throw std::logic_error("unhandled strategy");
}

}  // namespace moonstack::ctrl
