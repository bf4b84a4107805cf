#pragma once

#include <json.hpp>

#include "moonstack/model/description.hpp"
#include "moonstack/model/roles.hpp"

namespace moonstack::model {

RobotDescription description_from_json(const nlohmann::json& doc);
nlohmann::json description_to_json(const RobotDescription& desc);

RoleTable role_table_from_json(const nlohmann::json& doc, const std::string& path = "role_table");
nlohmann::json role_table_to_json(const RoleTable& roles);

}  // namespace moonstack::model
