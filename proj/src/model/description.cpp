#include "moonstack/model/description.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "moonstack/error.hpp"
#include "moonstack/model/json_io.hpp"
#include "moonstack/util/json_parse.hpp"

namespace moonstack::model {

using nlohmann::json;

namespace {

constexpr std::array<double, 7> kCanonicalLinks{0.10, 0.25, 0.30, 0.30, 0.30, 0.20, 0.10};

bool is_gripper_port(std::string_view port) { return port == "gripper1" || port == "gripper2"; }

std::string at(const std::string& base, std::string_view field) { return base + "." + std::string(field); }
std::string at(const std::string& base, std::size_t i) { return base + "[" + std::to_string(i) + "]"; }

const json& require(const json& obj, std::string_view key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(at(path, key), "missing field");
  return *it;
}

double require_number(const json& obj, std::string_view key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) throw ValidationError(at(path, key), "expected a number");
  return v.get<double>();
}

std::string require_string(const json& obj, std::string_view key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_string()) throw ValidationError(at(path, key), "expected a string");
  return v.get<std::string>();
}

ModuleKind parse_module_kind(const std::string& s, const std::string& path) {
  if (s == "Limb") return ModuleKind::limb;
  if (s == "Wheel") return ModuleKind::wheel;
  if (s == "Body") return ModuleKind::body;
  if (s == "Gripper-tool") return ModuleKind::gripper_tool;
  throw ValidationError(path, "unknown module kind '" + s + "'");
}

JointKind parse_joint_kind(const std::string& s, const std::string& path) {
  if (s == "revolute") return JointKind::revolute;
  if (s == "prismatic") return JointKind::prismatic;
  throw ValidationError(path, "unknown joint kind '" + s + "'");
}

JointSpec joint_from_json(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError(path, "expected an object");
  JointSpec spec;
  spec.name = require_string(j, "name", path);
  const json& axis = require(j, "axis", path);
  if (!axis.is_array() || axis.size() != 3) throw ValidationError(at(path, "axis"), "expected [x, y, z]");
  for (std::size_t i = 0; i < 3; ++i) {
    if (!axis[i].is_number()) throw ValidationError(at(at(path, "axis"), i), "expected a number");
    spec.axis[i] = axis[i].get<double>();
  }
  double norm = std::hypot(spec.axis[0], spec.axis[1], spec.axis[2]);
  if (std::abs(norm - 1.0) > 1e-9) throw ValidationError(at(path, "axis"), "axis must be a unit vector");
  spec.kind = parse_joint_kind(require_string(j, "kind", path), at(path, "kind"));
  const json& limits = require(j, "limits", path);
  if (!limits.is_array() || limits.size() != 2 || !limits[0].is_number() || !limits[1].is_number())
    throw ValidationError(at(path, "limits"), "expected [lo, hi]");
  spec.limits = {limits[0].get<double>(), limits[1].get<double>()};
  if (!(spec.limits.lo < spec.limits.hi)) throw ValidationError(at(path, "limits"), "lo must be below hi");
  spec.v_max = require_number(j, "v_max", path);
  if (!(spec.v_max > 0.0)) throw ValidationError(at(path, "v_max"), "must be positive");
  spec.link_length = require_number(j, "link_length", path);
  if (!(spec.link_length >= 0.0)) throw ValidationError(at(path, "link_length"), "must be non-negative");
  return spec;
}

json joint_to_json(const JointSpec& j) {
  return json{{"name", j.name},
              {"axis", j.axis},
              {"kind", to_string(j.kind)},
              {"limits", {j.limits.lo, j.limits.hi}},
              {"v_max", j.v_max},
              {"link_length", j.link_length}};
}

void check_module(const ModuleSpec& m, const std::string& path) {
  if (m.id.empty()) throw ValidationError(at(path, "id"), "empty module id");
  if (m.id.find('.') != std::string::npos || m.id.find('/') != std::string::npos)
    throw ValidationError(at(path, "id"), "module id may not contain '.' or '/'");
  std::set<std::string_view> fixtures;
  for (const auto& f : m.fixtures) {
    if (!fixtures.insert(f).second) throw ValidationError(at(path, "fixtures"), "duplicate fixture id '" + f + "'");
    if (is_gripper_port(f)) throw ValidationError(at(path, "fixtures"), "fixture id '" + f + "' is reserved");
  }
  std::set<std::string_view> joints;
  for (const auto& j : m.joints) {
    if (!joints.insert(j.name).second) throw ValidationError(at(path, "joints"), "duplicate joint name '" + j.name + "'");
  }
  switch (m.kind) {
    case ModuleKind::limb:
      if (m.joints.size() != kLimbJoints) throw ValidationError(at(path, "joints"), "a Limb has exactly 7 joints");
      if (!m.fixtures.empty()) throw ValidationError(at(path, "fixtures"), "a Limb carries grippers, not fixtures");
      break;
    case ModuleKind::body:
      if (!m.joints.empty()) throw ValidationError(at(path, "joints"), "a Body has no joints");
      if (m.fixtures.size() != kBodyFixtures) throw ValidationError(at(path, "fixtures"), "a Body has exactly 4 fixtures");
      break;
    case ModuleKind::wheel:
    case ModuleKind::gripper_tool:
      break;
  }
}

bool has_port(const ModuleSpec& m, std::string_view port) {
  if (m.kind == ModuleKind::limb) return is_gripper_port(port);
  return std::find(m.fixtures.begin(), m.fixtures.end(), port) != m.fixtures.end();
}

// Reverse a limb so that it is driven from its gripper2 end. Joint positions along
// the straightened limb are preserved; rotation senses flip with the frame direction.
KinematicChain reversed(const ModuleSpec& limb) {
  KinematicChain chain;
  chain.module = limb.id;
  chain.root_frame = limb.id + ".gripper2";
  chain.tip_frame = limb.id + ".gripper1";
  const auto& js = limb.joints;
  chain.base_offset = js.back().link_length;
  for (std::size_t k = js.size(); k-- > 0;) {
    JointSpec j = js[k];
    for (double& a : j.axis) a = -a;
    j.link_length = k > 0 ? js[k - 1].link_length : 0.0;
    chain.joints.push_back(std::move(j));
  }
  return chain;
}

KinematicChain forward(const ModuleSpec& limb) {
  KinematicChain chain;
  chain.module = limb.id;
  chain.root_frame = limb.id + ".gripper1";
  chain.tip_frame = limb.id + ".gripper2";
  chain.joints = limb.joints;
  return chain;
}

// Union-find over module indices.
struct Forest {
  std::vector<std::size_t> parent;
  explicit Forest(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[std::max(a, b)] = std::min(a, b);
    return true;
  }
};

std::vector<KinematicChain> derive_chains(const RobotDescription& desc, const std::map<std::string, std::size_t>& index) {
  const auto& mods = desc.modules;
  // Root module and, for a limb root, the gripper it is driven from.
  std::size_t root = mods.size();
  std::string root_port;
  if (desc.root) {
    root = index.at(desc.root->module);
    root_port = desc.root->port;
  } else {
    for (std::size_t i = 0; i < mods.size(); ++i) {
      if (mods[i].kind == ModuleKind::body && (root == mods.size() || mods[i].id < mods[root].id)) root = i;
    }
    if (root == mods.size()) {
      for (std::size_t i = 0; i < mods.size(); ++i) {
        if (mods[i].kind == ModuleKind::limb) {
          root = i;
          root_port = "gripper1";
          break;
        }
      }
    }
    if (root == mods.size()) root = 0;
  }

  // Breadth-first walk; record the port through which each limb meets its parent.
  std::vector<std::string> entry_port(mods.size());
  std::vector<bool> seen(mods.size(), false);
  std::vector<std::size_t> queue{root};
  seen[root] = true;
  entry_port[root] = root_port;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    std::size_t cur = queue[head];
    for (const auto& a : desc.attachments) {
      const Endpoint* here = nullptr;
      const Endpoint* there = nullptr;
      if (a.gripper.module == mods[cur].id) {
        here = &a.gripper;
        there = &a.fixture;
      } else if (a.fixture.module == mods[cur].id) {
        here = &a.fixture;
        there = &a.gripper;
      } else {
        continue;
      }
      (void)here;
      std::size_t next = index.at(there->module);
      if (seen[next]) continue;
      seen[next] = true;
      entry_port[next] = there->port;
      queue.push_back(next);
    }
  }

  std::vector<KinematicChain> chains;
  for (std::size_t i = 0; i < mods.size(); ++i) {
    if (mods[i].kind != ModuleKind::limb) continue;
    chains.push_back(entry_port[i] == "gripper2" ? reversed(mods[i]) : forward(mods[i]));
  }
  std::sort(chains.begin(), chains.end(), [](const auto& a, const auto& b) { return a.module < b.module; });
  return chains;
}

}  // namespace

double KinematicChain::reach() const {
  double r = base_offset;
  for (const auto& j : joints) {
    r += j.link_length;
    if (j.kind == JointKind::prismatic) r += std::max(std::abs(j.limits.lo), std::abs(j.limits.hi));
  }
  return r;
}

const ModuleSpec* RobotDescription::find_module(std::string_view id) const {
  auto it = std::find_if(modules.begin(), modules.end(), [&](const auto& m) { return m.id == id; });
  return it == modules.end() ? nullptr : &*it;
}

const KinematicChain* RobotDescription::find_chain(std::string_view module_id) const {
  auto it = std::find_if(chains.begin(), chains.end(), [&](const auto& c) { return c.module == module_id; });
  return it == chains.end() ? nullptr : &*it;
}

std::string_view to_string(ModuleKind kind) {
  switch (kind) {
    case ModuleKind::limb: return "Limb";
    case ModuleKind::wheel: return "Wheel";
    case ModuleKind::body: return "Body";
    case ModuleKind::gripper_tool: return "Gripper-tool";
  }
  return "?";
}

std::string_view to_string(JointKind kind) { return kind == JointKind::revolute ? "revolute" : "prismatic"; }

int default_motor_count(ModuleKind kind) {
  switch (kind) {
    case ModuleKind::limb: return kLimbMotors;
    case ModuleKind::wheel: return kWheelMotors;
    case ModuleKind::body: return 0;
    case ModuleKind::gripper_tool: return kGripperToolMotors;
  }
  return 0;
}

std::vector<JointSpec> canonical_limb_joints() {
  std::vector<JointSpec> joints;
  for (int i = 0; i < kLimbJoints; ++i) {
    JointSpec j;
    j.name = "joint" + std::to_string(i + 1);
    bool roll = i % 2 == 0;
    j.axis = roll ? std::array<double, 3>{1.0, 0.0, 0.0} : std::array<double, 3>{0.0, 1.0, 0.0};
    j.kind = JointKind::revolute;
    j.limits = roll ? Interval{-3.14159, 3.14159} : Interval{-2.0, 2.0};
    j.v_max = kLimbJointSpeed;
    j.link_length = kCanonicalLinks[static_cast<std::size_t>(i)];
    joints.push_back(std::move(j));
  }
  return joints;
}

ModuleSpec make_limb(std::string id) {
  return ModuleSpec{std::move(id), ModuleKind::limb, canonical_limb_joints(), {}, kLimbMotors};
}

ModuleSpec make_wheel(std::string id, std::vector<std::string> fixtures) {
  return ModuleSpec{std::move(id), ModuleKind::wheel, {}, std::move(fixtures), kWheelMotors};
}

ModuleSpec make_body(std::string id) {
  return ModuleSpec{std::move(id), ModuleKind::body, {}, {"fixture1", "fixture2", "fixture3", "fixture4"}, 0};
}

Endpoint parse_endpoint(std::string_view text) {
  auto dot = text.find('.');
  if (dot == std::string_view::npos || dot == 0 || dot + 1 == text.size())
    throw ValidationError("", "malformed endpoint '" + std::string(text) + "', expected module.port");
  return Endpoint{std::string(text.substr(0, dot)), std::string(text.substr(dot + 1))};
}

RobotDescription finalize_description(RobotDescription desc) {
  if (desc.modules.empty()) throw ValidationError("modules", "no modules");

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < desc.modules.size(); ++i) {
    auto& m = desc.modules[i];
    std::string path = at(std::string("modules"), i);
    check_module(m, path);
    m.motor_count = default_motor_count(m.kind);
    if (!index.emplace(m.id, i).second) throw ValidationError(at(path, "id"), "duplicate module id '" + m.id + "'");
  }

  std::set<std::string> used;
  Forest forest(desc.modules.size());
  for (std::size_t i = 0; i < desc.attachments.size(); ++i) {
    const auto& a = desc.attachments[i];
    std::string path = at(std::string("attachments"), i);
    for (const Endpoint* e : {&a.gripper, &a.fixture}) {
      auto it = index.find(e->module);
      if (it == index.end() || !has_port(desc.modules[it->second], e->port))
        throw ValidationError(path, "dangling attachment id '" + e->str() + "'");
    }
    const auto& gm = desc.modules[index.at(a.gripper.module)];
    const auto& fm = desc.modules[index.at(a.fixture.module)];
    if (gm.kind != ModuleKind::limb || !is_gripper_port(a.gripper.port))
      throw ValidationError(path, "'" + a.gripper.str() + "' is not a gripper");
    if (fm.kind == ModuleKind::limb) throw ValidationError(path, "'" + a.fixture.str() + "' is not a grapple fixture");
    for (const Endpoint* e : {&a.gripper, &a.fixture}) {
      if (!used.insert(e->str()).second) throw ValidationError(path, "'" + e->str() + "' is used by more than one attachment");
    }
    if (!forest.unite(index.at(a.gripper.module), index.at(a.fixture.module)))
      throw ValidationError(path, "cyclic assembly");
  }
  for (std::size_t i = 1; i < desc.modules.size(); ++i) {
    if (forest.find(i) != forest.find(0))
      throw ValidationError("attachments", "module '" + desc.modules[i].id + "' is not connected to the assembly");
  }

  if (desc.root) {
    auto it = index.find(desc.root->module);
    if (it == index.end() || !has_port(desc.modules[it->second], desc.root->port))
      throw ValidationError("root", "dangling root id '" + desc.root->str() + "'");
    if (used.count(desc.root->str())) throw ValidationError("root", "'" + desc.root->str() + "' is already attached");
  }

  desc.chains = derive_chains(desc, index);
  return desc;
}

RobotDescription description_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("", "description must be an object");
  RobotDescription desc;
  desc.name = require_string(doc, "name", "");
  const json& modules = require(doc, "modules", "");
  if (!modules.is_array()) throw ValidationError("modules", "expected an array");
  for (std::size_t i = 0; i < modules.size(); ++i) {
    std::string path = at(std::string("modules"), i);
    const json& m = modules[i];
    if (!m.is_object()) throw ValidationError(path, "expected an object");
    ModuleSpec spec;
    spec.id = require_string(m, "id", path);
    spec.kind = parse_module_kind(require_string(m, "kind", path), at(path, "kind"));
    if (auto it = m.find("joints"); it != m.end()) {
      if (!it->is_array()) throw ValidationError(at(path, "joints"), "expected an array");
      for (std::size_t k = 0; k < it->size(); ++k) spec.joints.push_back(joint_from_json((*it)[k], at(at(path, "joints"), k)));
    }
    if (spec.kind == ModuleKind::limb && spec.joints.empty()) spec.joints = canonical_limb_joints();
    if (auto it = m.find("fixtures"); it != m.end()) {
      if (!it->is_array()) throw ValidationError(at(path, "fixtures"), "expected an array");
      for (const auto& f : *it) {
        if (!f.is_string()) throw ValidationError(at(path, "fixtures"), "expected fixture id strings");
        spec.fixtures.push_back(f.get<std::string>());
      }
    }
    desc.modules.push_back(std::move(spec));
  }
  if (auto it = doc.find("attachments"); it != doc.end()) {
    if (!it->is_array()) throw ValidationError("attachments", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& pair = (*it)[i];
      std::string path = at(std::string("attachments"), i);
      if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string() || !pair[1].is_string())
        throw ValidationError(path, "expected [\"module.gripperN\", \"module.fixture\"]");
      try {
        desc.attachments.push_back({parse_endpoint(pair[0].get<std::string>()), parse_endpoint(pair[1].get<std::string>())});
      } catch (const ValidationError& e) {
        throw ValidationError(path, e.what());
      }
    }
  }
  if (auto it = doc.find("root"); it != doc.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("root", "expected \"module.port\"");
    desc.root = parse_endpoint(it->get<std::string>());
  }
  return finalize_description(std::move(desc));
}

json description_to_json(const RobotDescription& desc) {
  json modules = json::array();
  for (const auto& m : desc.modules) {
    json joints = json::array();
    for (const auto& j : m.joints) joints.push_back(joint_to_json(j));
    modules.push_back({{"id", m.id}, {"kind", to_string(m.kind)}, {"joints", joints}, {"fixtures", m.fixtures}});
  }
  json attachments = json::array();
  for (const auto& a : desc.attachments) attachments.push_back({a.gripper.str(), a.fixture.str()});
  json doc{{"name", desc.name}, {"modules", modules}, {"attachments", attachments}};
  if (desc.root) doc["root"] = desc.root->str();
  return doc;
}

RobotDescription parse_description(std::string_view text) { return description_from_json(util::parse_json(text)); }

std::string serialize_description(const RobotDescription& desc) { return description_to_json(desc).dump(2); }

int motor_count(const RobotDescription& desc) {
  int total = 0;
  for (const auto& m : desc.modules) total += m.motor_count;
  return total;
}

}  // namespace moonstack::model
