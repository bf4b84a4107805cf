#pragma once

#include "moonstack/ctrl/strategy.hpp"
#include "moonstack/model/description.hpp"

namespace moonstack::ctrl {

struct LocalJointState {
  double angle = 0.0;
  double velocity = 0.0;
};

/// Onboard closed-loop controller. Position commands are tracked at
/// min(v_max, |error| / dt); velocity commands are saturated at v_max. The joint
/// never leaves `limits`. Throws std::invalid_argument unless dt > 0.
LocalJointState local_joint_step(const LocalJointState& state, const CommandOut& command,
                                 const model::Interval& limits, double v_max, double dt);

}  // namespace moonstack::ctrl
