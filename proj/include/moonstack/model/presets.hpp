#pragma once

#include "moonstack/model/description.hpp"

namespace moonstack::model {

// Reference assemblies.
RobotDescription minimal();   // 1 Limb + 1 Wheel
RobotDescription vehicle();   // 1 Limb + 2 Wheels
RobotDescription dragon();    // 2 Minimals in series
RobotDescription tricycle();  // 3 Minimals on a Body
/// A single limb whose gripper1 is mounted on the launch-lock palette.
RobotDescription palette_limb();

}  // namespace moonstack::model
