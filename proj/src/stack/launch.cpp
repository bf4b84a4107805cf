#include "moonstack/stack/launch.hpp"

#include <algorithm>

#include "moonstack/error.hpp"
#include "moonstack/stack/ik_node.hpp"
#include "moonstack/stack/joint_node.hpp"
#include "moonstack/stack/limb_node.hpp"
#include "moonstack/stack/mover.hpp"
#include "moonstack/stack/operator_node.hpp"

namespace moonstack::stack {

Host launch(std::string_view node_id, const model::RobotDescription& desc, const model::RoleTable& roles,
            const LaunchConfig& config) {
  model::NodeRole role = model::chain_for_node(desc, node_id, roles);
  Host host{role.node_id, role, {}};
  std::vector<model::Level> levels = role.levels;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  const double de = config.params.delta_e;
  for (auto level : levels) {
    switch (level) {
      case model::Level::joint:
        host.nodes.push_back(std::make_unique<JointNode>(host.id, *role.chain, config.silence_timeout));
        break;
      case model::Level::ik:
        host.nodes.push_back(std::make_unique<IkNode>(host.id, *role.chain, de, config.silence_timeout));
        break;
      case model::Level::limb:
        host.nodes.push_back(std::make_unique<LimbNode>(host.id, *role.chain, de, config.silence_timeout, config.tick));
        break;
      case model::Level::mover:
        host.nodes.push_back(std::make_unique<MoverNode>(host.id, desc.chains));
        break;
      case model::Level::operator_:
        host.nodes.push_back(
            std::make_unique<OperatorNode>(host.id, desc, config.strategy, config.params, config.tick));
        break;
      case model::Level::wheel_direct:
        host.nodes.push_back(std::make_unique<WheelNode>(host.id, role.module));
        break;
      case model::Level::calibrator: {
        auto it = config.calibrations.find(host.id);
        if (it == config.calibrations.end())
          throw ValidationError("calibration", "no calibration entry for '" + host.id + "'");
        CalibrationState state = it->second;
        const auto* m = desc.find_module(state.module);
        if (!m) throw ValidationError("calibration.joint", "unknown module '" + state.module + "'");
        auto j = std::find_if(m->joints.begin(), m->joints.end(), [&](const auto& s) { return s.name == state.joint; });
        if (j == m->joints.end())
          throw ValidationError("calibration.joint", "unknown joint '" + state.module + "/" + state.joint + "'");
        state.limits = j->limits;
        host.nodes.push_back(std::make_unique<CalibratorNode>(host.id, std::move(state), config.tick));
        break;
      }
      case model::Level::mission_control:
        break;  // telemetry aggregation lives with the runner
    }
  }
  return host;
}

Host Launcher::launch(std::string_view node_id, const model::RobotDescription& desc, const model::RoleTable& roles,
                      const LaunchConfig& config) {
  if (launched(node_id)) throw Error("node '" + std::string(node_id) + "' is already running");
  Host h = stack::launch(node_id, desc, roles, config);
  ids_.insert(h.id);
  return h;
}

}  // namespace moonstack::stack
