#include "moonstack/stack/messages.hpp"

#include <json.hpp>

#include "moonstack/error.hpp"

namespace moonstack::stack {

using nlohmann::json;

namespace topic {

namespace {
std::string join(std::initializer_list<std::string_view> parts) {
  std::string out;
  for (auto p : parts) {
    if (!out.empty()) out += '/';
    out += p;
  }
  return out;
}
}  // namespace

std::string cmd(std::string_view module, std::string_view joint) { return join({"cmd", module, joint}); }
std::string sensor(std::string_view module, std::string_view joint) { return join({"sensor", module, joint}); }
std::string calib(std::string_view module, std::string_view joint) { return join({"calib", module, joint}); }
std::string wheel_speed(std::string_view module) { return join({"wheel", module, "speed"}); }
std::string traj(std::string_view limb) { return join({"traj", limb}); }
std::string ik(std::string_view limb) { return join({"ik", limb}); }
std::string grip(std::string_view module, std::string_view port) { return join({"grip", module, port}); }
std::string telemetry(std::string_view node) { return join({"telemetry", node}); }

std::vector<std::string_view> split(std::string_view topic) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    auto slash = topic.find('/', start);
    parts.push_back(topic.substr(start, slash == std::string_view::npos ? std::string_view::npos : slash - start));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return parts;
}

}  // namespace topic

namespace {

json parse(std::string_view payload) {
  try {
    return json::parse(payload);
  } catch (const json::exception& e) {
    throw Error(std::string("malformed payload: ") + e.what());
  }
}

template <typename F>
auto guarded(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string encode(const JointCommandMsg& m) {
  return json{{"t", m.t},
              {"kind", m.command.kind == ctrl::CommandKind::position ? "position" : "velocity"},
              {"value", m.command.value}}
      .dump();
}

JointCommandMsg decode_joint_command(std::string_view payload) {
  return guarded("joint command", [&] {
    json j = parse(payload);
    JointCommandMsg m;
    m.t = j.at("t").get<double>();
    auto kind = j.at("kind").get<std::string>();
    if (kind == "position") {
      m.command.kind = ctrl::CommandKind::position;
    } else if (kind == "velocity") {
      m.command.kind = ctrl::CommandKind::velocity;
    } else {
      throw Error("joint command: unknown kind '" + kind + "'");
    }
    m.command.value = j.at("value").get<double>();
    return m;
  });
}

std::string encode(const SensorMsg& m) {
  return json{{"t", m.t}, {"angle", m.angle}, {"velocity", m.velocity}, {"reflector", m.reflector}}.dump();
}

SensorMsg decode_sensor(std::string_view payload) {
  return guarded("sensor", [&] {
    json j = parse(payload);
    return SensorMsg{j.at("t").get<double>(), j.at("angle").get<double>(), j.at("velocity").get<double>(),
                     j.at("reflector").get<bool>()};
  });
}

std::string encode(const WheelSpeedMsg& m) { return json{{"t", m.t}, {"left", m.left}, {"right", m.right}}.dump(); }

WheelSpeedMsg decode_wheel_speed(std::string_view payload) {
  return guarded("wheel speed", [&] {
    json j = parse(payload);
    return WheelSpeedMsg{j.at("t").get<double>(), j.at("left").get<double>(), j.at("right").get<double>()};
  });
}

std::string encode(const GripMsg& m) { return json{{"t", m.t}, {"close", m.close}}.dump(); }

GripMsg decode_grip(std::string_view payload) {
  return guarded("grip", [&] {
    json j = parse(payload);
    return GripMsg{j.at("t").get<double>(), j.at("close").get<bool>()};
  });
}

std::string encode(const IkMsg& m) {
  json j{{"t", m.t}};
  if (m.mode == IkMsg::Mode::nudge) {
    j["mode"] = "nudge";
    j["nudge"] = std::vector<double>(m.nudge.data(), m.nudge.data() + 6);
  } else {
    const auto& p = m.target.position;
    const auto& q = m.target.orientation;
    j["mode"] = "target";
    j["position"] = {p.x(), p.y(), p.z()};
    j["orientation"] = {q.w(), q.x(), q.y(), q.z()};
  }
  return j.dump();
}

IkMsg decode_ik(std::string_view payload) {
  return guarded("ik", [&] {
    json j = parse(payload);
    IkMsg m;
    m.t = j.at("t").get<double>();
    auto mode = j.at("mode").get<std::string>();
    if (mode == "nudge") {
      auto v = j.at("nudge").get<std::vector<double>>();
      if (v.size() != 6) throw Error("ik: nudge needs 6 components");
      for (int i = 0; i < 6; ++i) m.nudge[i] = v[static_cast<std::size_t>(i)];
    } else if (mode == "target") {
      m.mode = IkMsg::Mode::target;
      auto p = j.at("position").get<std::vector<double>>();
      auto q = j.at("orientation").get<std::vector<double>>();
      if (p.size() != 3 || q.size() != 4) throw Error("ik: target needs position[3] and orientation[4]");
      m.target.position = {p[0], p[1], p[2]};
      m.target.orientation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]).normalized();
    } else {
      throw Error("ik: unknown mode '" + mode + "'");
    }
    return m;
  });
}

std::string encode(const TrajectoryMsg& m) {
  json wps = json::array();
  for (const auto& w : m.waypoints) wps.push_back({{"t", w.t}, {"q", w.q}});
  return json{{"t", m.t}, {"id", m.id}, {"joints", m.joints}, {"waypoints", wps}}.dump();
}

TrajectoryMsg decode_trajectory(std::string_view payload) {
  return guarded("trajectory", [&] {
    json j = parse(payload);
    TrajectoryMsg m;
    m.t = j.at("t").get<double>();
    m.id = j.at("id").get<std::uint64_t>();
    m.joints = j.at("joints").get<std::vector<std::string>>();
    for (const auto& w : j.at("waypoints")) m.waypoints.push_back({w.at("t").get<double>(), w.at("q").get<std::vector<double>>()});
    return m;
  });
}

std::string encode(const PlanMsg& m) { return json{{"t", m.t}, {"id", m.id}, {"targets", m.targets}}.dump(); }

PlanMsg decode_plan(std::string_view payload) {
  return guarded("plan", [&] {
    json j = parse(payload);
    PlanMsg m;
    m.t = j.at("t").get<double>();
    m.id = j.value("id", std::uint64_t{0});
    m.targets = j.at("targets").get<std::map<std::string, std::vector<double>>>();
    return m;
  });
}

}  // namespace moonstack::stack
