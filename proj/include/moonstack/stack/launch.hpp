#pragma once

#include <map>
#include <memory>
#include <set>

#include "moonstack/stack/calibrator.hpp"
#include "moonstack/stack/node.hpp"

namespace moonstack::stack {

struct LaunchConfig {
  ctrl::StrategyKind strategy = ctrl::StrategyKind::clamped_integral;
  ctrl::StrategyParams params;
  double silence_timeout = 0.3;
  double tick = 0.02;
  std::map<std::string, CalibrationState> calibrations;  // by node id
};

/// The stack levels one computer runs, ordered by level.
struct Host {
  std::string id;
  model::NodeRole role;
  std::vector<std::unique_ptr<Node>> nodes;

  template <typename T>
  T* find() const {
    for (const auto& n : nodes)
      if (auto* p = dynamic_cast<T*>(n.get())) return p;
    return nullptr;
  }
};

/// Instantiate exactly the levels the role table assigns to `node_id`. The result
/// depends only on the arguments. Throws ValidationError for an unknown id, a
/// chain-less level 1-3 role, or a calibrator without a calibration entry.
Host launch(std::string_view node_id, const model::RobotDescription& desc, const model::RoleTable& roles,
            const LaunchConfig& config = {});

/// Keeps track of launched ids; launching the same id twice is an error.
class Launcher {
 public:
  Host launch(std::string_view node_id, const model::RobotDescription& desc, const model::RoleTable& roles,
              const LaunchConfig& config = {});
  bool launched(std::string_view node_id) const { return ids_.count(std::string(node_id)) > 0; }

 private:
  std::set<std::string> ids_;
};

}  // namespace moonstack::stack
