#include "moonstack/model/roles.hpp"

#include <algorithm>

#include "moonstack/error.hpp"
#include "moonstack/model/json_io.hpp"

namespace moonstack::model {

using nlohmann::json;

std::string_view to_string(Level level) {
  switch (level) {
    case Level::joint: return "1";
    case Level::ik: return "2";
    case Level::limb: return "3";
    case Level::mover: return "4";
    case Level::operator_: return "5";
    case Level::wheel_direct: return "wheel-direct";
    case Level::calibrator: return "calibrator";
    case Level::mission_control: return "mission-control";
  }
  return "?";
}

Level parse_level(std::string_view text) {
  if (text == "1") return Level::joint;
  if (text == "2") return Level::ik;
  if (text == "3") return Level::limb;
  if (text == "4") return Level::mover;
  if (text == "5") return Level::operator_;
  if (text == "wheel-direct") return Level::wheel_direct;
  if (text == "calibrator") return Level::calibrator;
  if (text == "mission-control") return Level::mission_control;
  throw ValidationError("", "unknown level '" + std::string(text) + "'");
}

bool NodeRole::has(Level level) const { return std::find(levels.begin(), levels.end(), level) != levels.end(); }

NodeRole chain_for_node(const RobotDescription& desc, std::string_view node_id, const RoleTable& roles) {
  auto it = roles.find(node_id);
  if (it == roles.end()) throw ValidationError("role_table", "unknown node id '" + std::string(node_id) + "'");
  const RoleEntry& entry = it->second;
  NodeRole role{std::string(node_id), entry.levels, entry.module, std::nullopt};
  bool chained = std::any_of(entry.levels.begin(), entry.levels.end(), needs_chain);
  if (chained) {
    const KinematicChain* chain = desc.find_chain(entry.module);
    if (!chain)
      throw ValidationError("role_table." + std::string(node_id),
                            "levels 1-3 need a kinematic chain but none is assigned to '" + std::string(node_id) + "'");
    role.chain = *chain;
  } else if (role.has(Level::wheel_direct)) {
    const ModuleSpec* m = desc.find_module(entry.module);
    if (!m || m->kind != ModuleKind::wheel)
      throw ValidationError("role_table." + std::string(node_id), "wheel-direct role needs a Wheel module");
  }
  return role;
}

RoleTable role_table_from_json(const json& doc, const std::string& path) {
  if (!doc.is_object()) throw ValidationError(path, "expected an object");
  RoleTable table;
  for (const auto& [id, row] : doc.items()) {
    std::string here = path + "." + id;
    if (!row.is_object()) throw ValidationError(here, "expected an object");
    RoleEntry entry;
    auto levels = row.find("levels");
    if (levels == row.end() || !levels->is_array() || levels->empty())
      throw ValidationError(here + ".levels", "expected a non-empty array");
    for (const auto& l : *levels) {
      try {
        if (l.is_number_integer()) {
          entry.levels.push_back(parse_level(std::to_string(l.get<int>())));
        } else if (l.is_string()) {
          entry.levels.push_back(parse_level(l.get<std::string>()));
        } else {
          throw ValidationError("", "expected an integer or a level name");
        }
      } catch (const ValidationError& e) {
        throw ValidationError(here + ".levels", e.what());
      }
    }
    if (auto m = row.find("module"); m != row.end()) {
      if (!m->is_string()) throw ValidationError(here + ".module", "expected a string");
      entry.module = m->get<std::string>();
    }
    bool chained = std::any_of(entry.levels.begin(), entry.levels.end(), needs_chain);
    bool high = std::any_of(entry.levels.begin(), entry.levels.end(),
                            [](Level l) { return l == Level::mover || l == Level::operator_; });
    if (chained && entry.module.empty()) throw ValidationError(here + ".module", "levels 1-3 need a module");
    if (high && !chained && !entry.module.empty())
      throw ValidationError(here + ".module", "levels 4-5 are not bound to a chain");
    table.emplace(id, std::move(entry));
  }
  return table;
}

json role_table_to_json(const RoleTable& roles) {
  json doc = json::object();
  for (const auto& [id, entry] : roles) {
    json levels = json::array();
    for (Level l : entry.levels) {
      if (static_cast<int>(l) <= 5) {
        levels.push_back(static_cast<int>(l));
      } else {
        levels.push_back(to_string(l));
      }
    }
    json row{{"levels", levels}};
    if (!entry.module.empty()) row["module"] = entry.module;
    doc[id] = row;
  }
  return doc;
}

RoleTable parse_role_table(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SyntaxError("syntax error in role table", 1, static_cast<int>(e.byte));
  }
  return role_table_from_json(doc);
}

}  // namespace moonstack::model
