#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "moonstack/model/description.hpp"

namespace moonstack::model {

enum class Level { joint = 1, ik = 2, limb = 3, mover = 4, operator_ = 5, wheel_direct, calibrator, mission_control };

std::string_view to_string(Level level);
Level parse_level(std::string_view text);

/// True for the levels that must be bound to a kinematic chain.
constexpr bool needs_chain(Level level) {
  return level == Level::joint || level == Level::ik || level == Level::limb;
}

/// Row of a role table: which levels a computer runs and which module it serves.
struct RoleEntry {
  std::vector<Level> levels;
  std::string module;  // limb for levels 1-3, wheel for wheel-direct; empty otherwise

  bool operator==(const RoleEntry&) const = default;
};

using RoleTable = std::map<std::string, RoleEntry, std::less<>>;

struct NodeRole {
  std::string node_id;
  std::vector<Level> levels;
  std::string module;
  std::optional<KinematicChain> chain;

  bool has(Level level) const;
  bool operator==(const NodeRole&) const = default;
};

/// Resolve the role of `node_id`. Throws ValidationError for unknown ids or when a
/// level 1-3 role has no chain to bind to.
NodeRole chain_for_node(const RobotDescription& desc, std::string_view node_id, const RoleTable& roles);

/// Role table from its JSON form: {"limb1-pc": {"levels": [1, 2, 3], "module": "limb1"}, ...}.
/// Levels are integers 1-5 or "wheel-direct" / "calibrator" / "mission-control".
RoleTable parse_role_table(std::string_view text);

}  // namespace moonstack::model
