#include "moonstack/ops/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "moonstack/error.hpp"
#include "moonstack/model/json_io.hpp"
#include "moonstack/util/json_parse.hpp"

namespace moonstack::ops {

using nlohmann::json;

namespace {

std::string idx(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

template <typename T>
T get(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(path.empty() ? key : path + "." + key, "missing");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ValidationError(path.empty() ? key : path + "." + key, "wrong type");
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& path) {
  return obj.contains(key) ? get<T>(obj, key, path) : fallback;
}

std::vector<double> numbers(const json& obj, const char* key, std::size_t n, const std::string& path) {
  auto v = get<std::vector<double>>(obj, key, path);
  if (v.size() != n) throw ValidationError(path + "." + key, "expected " + std::to_string(n) + " numbers");
  return v;
}

std::vector<bus::Window> windows_from_json(const json& arr, const std::string& path) {
  if (!arr.is_array()) throw ValidationError(path, "expected an array of [start, end] pairs");
  std::vector<bus::Window> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& w = arr[i];
    if (!w.is_array() || w.size() != 2 || !w[0].is_number() || !(w[1].is_number() || w[1].is_null()))
      throw ValidationError(idx(path, i), "expected [start, end] with end a number or null");
    out.push_back({w[0].get<double>(), w[1].is_null() ? bus::kForever : w[1].get<double>()});
  }
  return out;
}

json windows_to_json(const std::vector<bus::Window>& ws) {
  json arr = json::array();
  for (const auto& w : ws) arr.push_back({w.start, w.end == bus::kForever ? json(nullptr) : json(w.end)});
  return arr;
}

LinkSpec link_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path, "expected an object");
  LinkSpec l;
  l.a = get<std::string>(j, "a", path);
  l.b = get<std::string>(j, "b", path);
  auto dir = get_or<std::string>(j, "direction", "both", path);
  if (dir == "forward") {
    l.direction = bus::Direction::forward;
  } else if (dir != "both") {
    throw ValidationError(path + ".direction", "expected \"both\" or \"forward\"");
  }
  auto& c = l.condition;
  if (j.contains("connected_intervals")) c.connected_intervals = windows_from_json(j["connected_intervals"], path + ".connected_intervals");
  if (j.contains("outages")) {
    if (j.contains("connected_intervals"))
      throw ValidationError(path + ".outages", "give either outages or connected_intervals");
    // complement of the outage windows
    auto gaps = windows_from_json(j["outages"], path + ".outages");
    c.connected_intervals.clear();
    double from = 0.0;
    for (const auto& g : gaps) {
      if (g.start > from) c.connected_intervals.push_back({from, g.start});
      from = std::max(from, g.end);
    }
    if (from != bus::kForever) c.connected_intervals.push_back({from, bus::kForever});
  }
  c.latency = get_or(j, "latency", 0.0, path);
  c.jitter = get_or(j, "jitter", 0.0, path);
  c.jitter_seed = get_or<std::uint64_t>(j, "jitter_seed", 0, path);
  c.drop_rate = get_or(j, "drop_rate", 0.0, path);
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(path + (e.path().empty() ? "" : "." + e.path()), e.what());
  }
  return l;
}

stack::InputEvent event_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path, "expected an object");
  stack::InputEvent ev;
  ev.t = get<double>(j, "t", path);
  ev.op_id = get<std::string>(j, "operator", path);
  try {
    ev.op = stack::parse_input_op(get<std::string>(j, "op", path));
  } catch (const ValidationError& e) {
    throw ValidationError(path + ".op", e.what());
  }
  ev.target = get_or<std::string>(j, "target", "", path);
  ev.speed = get_or(j, "speed", 0.0, path);
  ev.close = get_or(j, "close", true, path);
  if (ev.op == stack::InputOp::plan) ev.plan = get<std::map<std::string, std::vector<double>>>(j, "plan", path);
  if (ev.op == stack::InputOp::ik_target) ev.pose = pose_from_json(j, path);
  if (ev.op != stack::InputOp::plan && ev.target.empty()) throw ValidationError(path + ".target", "missing");
  return ev;
}

json event_to_json(const stack::InputEvent& ev) {
  json j{{"t", ev.t}, {"operator", ev.op_id}, {"op", stack::to_string(ev.op)}};
  if (!ev.target.empty()) j["target"] = ev.target;
  if (ev.op == stack::InputOp::down) j["speed"] = ev.speed;
  if (ev.op == stack::InputOp::plan) j["plan"] = ev.plan;
  if (ev.op == stack::InputOp::grip) j["close"] = ev.close;
  if (ev.op == stack::InputOp::ik_target) j.update(pose_to_json(ev.pose));
  return j;
}

model::ModuleSpec scene_module_from_json(const json& j, const std::string& path) {
  auto id = get<std::string>(j, "id", path);
  auto kind = get<std::string>(j, "kind", path);
  std::transform(kind.begin(), kind.end(), kind.begin(), [](unsigned char c) { return std::tolower(c); });
  if (kind == "limb") return model::make_limb(id);
  if (kind == "body") return model::make_body(id);
  if (kind == "wheel") {
    auto fixtures = get_or<std::vector<std::string>>(j, "fixtures", {"fixture1", "fixture2"}, path);
    return model::make_wheel(id, fixtures);
  }
  throw ValidationError(path + ".kind", "expected limb, wheel or body");
}

bool has_joint(const model::RobotDescription& d, const std::string& key) {
  auto slash = key.find('/');
  if (slash == std::string::npos) return false;
  const auto* m = d.find_module(key.substr(0, slash));
  if (!m) return false;
  auto name = key.substr(slash + 1);
  return std::any_of(m->joints.begin(), m->joints.end(), [&](const auto& j) { return j.name == name; });
}

}  // namespace

json pose_to_json(const kin::Pose& p) {
  const auto& q = p.orientation;
  return {{"position", {p.position.x(), p.position.y(), p.position.z()}}, {"orientation", {q.w(), q.x(), q.y(), q.z()}}};
}

kin::Pose pose_from_json(const json& j, const std::string& path) {
  kin::Pose p;
  auto pos = numbers(j, "position", 3, path);
  p.position = {pos[0], pos[1], pos[2]};
  if (j.contains("orientation")) {
    auto q = numbers(j, "orientation", 4, path);
    Eigen::Quaterniond quat(q[0], q[1], q[2], q[3]);
    if (quat.norm() < 1e-9) throw ValidationError(path + ".orientation", "zero quaternion");
    p.orientation = quat.normalized();
  }
  return p;
}

Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir) {
  json doc = util::parse_json(text);
  if (!doc.is_object()) throw ValidationError("", "scenario must be an object");
  Scenario s;
  s.name = get_or<std::string>(doc, "name", "", "");

  const json& d = doc.contains("description") ? doc["description"] : throw ValidationError("description", "missing");
  try {
    if (d.is_string()) {
      s.description_ref = d.get<std::string>();
      std::filesystem::path file = base_dir / s.description_ref;
      std::ifstream in(file);
      if (!in) throw ValidationError("", "cannot read '" + file.string() + "'");
      std::stringstream buf;
      buf << in.rdbuf();
      s.description = model::parse_description(buf.str());
    } else {
      s.description = model::description_from_json(d);
    }
  } catch (const ValidationError& e) {
    throw ValidationError("description" + (e.path().empty() ? "" : "." + e.path()), e.what());
  }

  if (!doc.contains("role_table")) throw ValidationError("role_table", "missing");
  s.role_table = model::role_table_from_json(doc["role_table"]);

  if (doc.contains("link_schedule")) {
    const auto& links = doc["link_schedule"];
    if (!links.is_array()) throw ValidationError("link_schedule", "expected an array");
    for (std::size_t i = 0; i < links.size(); ++i) s.link_schedule.push_back(link_from_json(links[i], idx("link_schedule", i)));
  }
  if (doc.contains("operator_script")) {
    const auto& script = doc["operator_script"];
    if (!script.is_array()) throw ValidationError("operator_script", "expected an array");
    for (std::size_t i = 0; i < script.size(); ++i)
      s.operator_script.push_back(event_from_json(script[i], idx("operator_script", i)));
  }
  s.duration = get<double>(doc, "duration", "");
  s.seed = get_or<std::uint64_t>(doc, "seed", 0, "");
  try {
    s.strategy = ctrl::parse_strategy(get_or<std::string>(doc, "strategy", "clamped", ""));
  } catch (const Error& e) {
    throw ValidationError("strategy", e.what());
  }
  if (doc.contains("parameters")) {
    const auto& p = doc["parameters"];
    s.parameters.delta_e = get_or(p, "delta_e", s.parameters.delta_e, "parameters");
    s.parameters.delta_offset = get_or(p, "delta_offset", s.parameters.delta_offset, "parameters");
    s.parameters.timeout = get_or(p, "timeout", s.parameters.timeout, "parameters");
    s.parameters.tick = get_or(p, "tick", s.parameters.tick, "parameters");
  }

  if (doc.contains("crashes"))
    for (std::size_t i = 0; i < doc["crashes"].size(); ++i) {
      const auto& c = doc["crashes"][i];
      s.crashes.push_back({get<std::string>(c, "node", idx("crashes", i)), get<double>(c, "t", idx("crashes", i))});
    }
  s.initial_state = get_or<std::map<std::string, double>>(doc, "initial_state", {}, "");
  s.zero_offsets = get_or<std::map<std::string, double>>(doc, "zero_offsets", {}, "");
  if (doc.contains("calibration"))
    for (std::size_t i = 0; i < doc["calibration"].size(); ++i) {
      const auto& c = doc["calibration"][i];
      auto path = idx("calibration", i);
      s.calibration.push_back({get<std::string>(c, "node", path), get<std::string>(c, "joint", path),
                               get_or(c, "homing_speed", -0.05, path)});
    }
  s.sensor_noise = get_or(doc, "sensor_noise", 0.0, "");
  s.battery_drain = get_or<std::map<std::string, double>>(doc, "battery_drain", {}, "");
  if (doc.contains("scene_modules"))
    for (std::size_t i = 0; i < doc["scene_modules"].size(); ++i)
      s.scene_modules.push_back(scene_module_from_json(doc["scene_modules"][i], idx("scene_modules", i)));
  if (doc.contains("fixtures"))
    for (std::size_t i = 0; i < doc["fixtures"].size(); ++i) {
      const auto& f = doc["fixtures"][i];
      auto path = idx("fixtures", i);
      FixtureSpec spec;
      spec.id = model::parse_endpoint(get<std::string>(f, "id", path));
      spec.pose = pose_from_json(f, path);
      spec.width = get_or(f, "width", 0.05, path);
      if (f.contains("held_by")) spec.held_by = model::parse_endpoint(get<std::string>(f, "held_by", path));
      s.fixtures.push_back(spec);
    }
  if (doc.contains("limb_bases"))
    for (const auto& [limb, p] : doc["limb_bases"].items()) s.limb_bases[limb] = pose_from_json(p, "limb_bases." + limb);

  validate_scenario(s);
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot read '" + file.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), file.parent_path());
}

void validate_scenario(const Scenario& s) {
  if (!(s.duration > 0.0)) throw ValidationError("duration", "must be positive");
  const auto& p = s.parameters;
  if (!(p.delta_e > 0.0)) throw ValidationError("parameters.delta_e", "must be positive");
  if (!(p.delta_offset > 0.0)) throw ValidationError("parameters.delta_offset", "must be positive");
  if (!(p.timeout > 0.0)) throw ValidationError("parameters.timeout", "must be positive");
  if (!(p.tick > 0.0)) throw ValidationError("parameters.tick", "must be positive");
  if (s.role_table.empty()) throw ValidationError("role_table", "no computers");
  for (const auto& [id, entry] : s.role_table) (void)model::chain_for_node(s.description, id, s.role_table);

  auto known_node = [&](const std::string& id) { return s.role_table.count(id) > 0; };
  for (std::size_t i = 0; i < s.link_schedule.size(); ++i) {
    const auto& l = s.link_schedule[i];
    if (!known_node(l.a)) throw ValidationError(idx("link_schedule", i) + ".a", "unknown node id '" + l.a + "'");
    if (!known_node(l.b)) throw ValidationError(idx("link_schedule", i) + ".b", "unknown node id '" + l.b + "'");
  }
  auto module_known = [&](const std::string& m) {
    if (s.description.find_module(m)) return true;
    return std::any_of(s.scene_modules.begin(), s.scene_modules.end(), [&](const auto& sm) { return sm.id == m; });
  };
  for (std::size_t i = 0; i < s.operator_script.size(); ++i) {
    const auto& ev = s.operator_script[i];
    auto path = idx("operator_script", i);
    auto row = s.role_table.find(ev.op_id);
    if (row == s.role_table.end()) throw ValidationError(path + ".operator", "unknown node id '" + ev.op_id + "'");
    const auto& lv = row->second.levels;
    if (std::find(lv.begin(), lv.end(), model::Level::operator_) == lv.end())
      throw ValidationError(path + ".operator", "'" + ev.op_id + "' does not run an operator node");
    if (i > 0 && ev.t < s.operator_script[i - 1].t) throw ValidationError(path + ".t", "events must be in time order");
    if (ev.op == stack::InputOp::plan) {
      for (const auto& [limb, q] : ev.plan)
        if (!module_known(limb)) throw ValidationError(path + ".plan." + limb, "unknown module");
      continue;
    }
    auto parts = stack::topic::split(ev.target);
    std::string module(parts[parts[0] == "ik" && parts.size() > 1 ? 1 : 0]);
    if (!module_known(module)) throw ValidationError(path + ".target", "unknown module '" + module + "'");
  }
  for (std::size_t i = 0; i < s.crashes.size(); ++i)
    if (!known_node(s.crashes[i].node)) throw ValidationError(idx("crashes", i) + ".node", "unknown node id");
  for (const auto& [key, v] : s.initial_state)
    if (!has_joint(s.description, key)) throw ValidationError("initial_state." + key, "unknown joint");
  for (const auto& [key, v] : s.zero_offsets)
    if (!has_joint(s.description, key)) throw ValidationError("zero_offsets." + key, "unknown joint");
  for (std::size_t i = 0; i < s.calibration.size(); ++i) {
    const auto& c = s.calibration[i];
    auto path = idx("calibration", i);
    auto row = s.role_table.find(c.node);
    if (row == s.role_table.end()) throw ValidationError(path + ".node", "unknown node id");
    const auto& lv = row->second.levels;
    if (std::find(lv.begin(), lv.end(), model::Level::calibrator) == lv.end())
      throw ValidationError(path + ".node", "'" + c.node + "' does not run a calibrator");
    if (!has_joint(s.description, c.joint)) throw ValidationError(path + ".joint", "unknown joint");
    if (c.homing_speed == 0.0) throw ValidationError(path + ".homing_speed", "must be nonzero");
  }
  for (const auto& [m, rate] : s.battery_drain) {
    if (!module_known(m)) throw ValidationError("battery_drain." + m, "unknown module");
    if (rate < 0.0) throw ValidationError("battery_drain." + m, "must not be negative");
  }
  for (const auto& [limb, pose] : s.limb_bases)
    if (!s.description.find_chain(limb)) throw ValidationError("limb_bases." + limb, "no kinematic chain");
  if (s.sensor_noise < 0.0) throw ValidationError("sensor_noise", "must not be negative");
}

json scenario_to_json(const Scenario& s) {
  json doc;
  doc["name"] = s.name;
  if (!s.description_ref.empty()) {
    doc["description"] = s.description_ref;
  } else {
    doc["description"] = model::description_to_json(s.description);
  }
  doc["role_table"] = model::role_table_to_json(s.role_table);
  json links = json::array();
  for (const auto& l : s.link_schedule) {
    const auto& c = l.condition;
    links.push_back({{"a", l.a},
                     {"b", l.b},
                     {"direction", l.direction == bus::Direction::both ? "both" : "forward"},
                     {"connected_intervals", windows_to_json(c.connected_intervals)},
                     {"latency", c.latency},
                     {"jitter", c.jitter},
                     {"jitter_seed", c.jitter_seed},
                     {"drop_rate", c.drop_rate}});
  }
  doc["link_schedule"] = links;
  json script = json::array();
  for (const auto& ev : s.operator_script) script.push_back(event_to_json(ev));
  doc["operator_script"] = script;
  doc["duration"] = s.duration;
  doc["seed"] = s.seed;
  doc["strategy"] = ctrl::to_string(s.strategy);
  doc["parameters"] = {{"delta_e", s.parameters.delta_e},
                       {"delta_offset", s.parameters.delta_offset},
                       {"timeout", s.parameters.timeout},
                       {"tick", s.parameters.tick}};
  if (!s.crashes.empty()) {
    json c = json::array();
    for (const auto& x : s.crashes) c.push_back({{"node", x.node}, {"t", x.t}});
    doc["crashes"] = c;
  }
  if (!s.initial_state.empty()) doc["initial_state"] = s.initial_state;
  if (!s.zero_offsets.empty()) doc["zero_offsets"] = s.zero_offsets;
  if (!s.calibration.empty()) {
    json c = json::array();
    for (const auto& x : s.calibration) c.push_back({{"node", x.node}, {"joint", x.joint}, {"homing_speed", x.homing_speed}});
    doc["calibration"] = c;
  }
  if (s.sensor_noise > 0.0) doc["sensor_noise"] = s.sensor_noise;
  if (!s.battery_drain.empty()) doc["battery_drain"] = s.battery_drain;
  if (!s.scene_modules.empty()) {
    json m = json::array();
    for (const auto& x : s.scene_modules) {
      json row{{"id", x.id}, {"kind", model::to_string(x.kind)}};
      if (x.kind == model::ModuleKind::wheel) row["fixtures"] = x.fixtures;
      m.push_back(row);
    }
    doc["scene_modules"] = m;
  }
  if (!s.fixtures.empty()) {
    json f = json::array();
    for (const auto& x : s.fixtures) {
      json row = pose_to_json(x.pose);
      row["id"] = x.id.str();
      row["width"] = x.width;
      if (x.held_by) row["held_by"] = x.held_by->str();
      f.push_back(row);
    }
    doc["fixtures"] = f;
  }
  if (!s.limb_bases.empty()) {
    json b = json::object();
    for (const auto& [limb, pose] : s.limb_bases) b[limb] = pose_to_json(pose);
    doc["limb_bases"] = b;
  }
  return doc;
}

}  // namespace moonstack::ops
