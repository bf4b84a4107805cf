#include "moonstack/plant/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "moonstack/error.hpp"

namespace moonstack::plant {

PlanarPose wheel_step(WheelPlant& wheel, double left_cmd, double right_cmd, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("wheel_step: dt must be positive");
  wheel.left_speed = left_cmd;
  wheel.right_speed = right_cmd;
  double v = wheel.radius * (left_cmd + right_cmd) / 2.0;
  double w = wheel.radius * (right_cmd - left_cmd) / wheel.track;
  // exact for piecewise-constant commands; straight-line limit below
  double h0 = wheel.pose.heading, h1 = h0 + w * dt;
  if (std::abs(w) < 1e-12) {
    wheel.pose.x += v * dt * std::cos(h0);
    wheel.pose.y += v * dt * std::sin(h0);
  } else {
    wheel.pose.x += v / w * (std::sin(h1) - std::sin(h0));
    wheel.pose.y -= v / w * (std::cos(h1) - std::cos(h0));
  }
  wheel.pose.heading += w * dt;
  return wheel.pose;
}

GraspEvent grasp_detect(GripperPlant& gripper, const kin::Pose& tip, std::vector<FixturePlant>& fixtures, double dt,
                        double t) {
  GraspEvent ev;
  double before = gripper.opening;
  double target = gripper.closing ? 0.0 : kGripperMaxOpening;
  double step = std::min(gripper.speed * dt, std::abs(target - before));
  gripper.opening = before + (target > before ? step : -step);

  if (gripper.grasped_fixture) {
    // holding: the jaws stop on the fixture until told to open past it
    auto it = std::find_if(fixtures.begin(), fixtures.end(),
                           [&](const FixturePlant& f) { return f.id == *gripper.grasped_fixture; });
    double width = it != fixtures.end() ? it->width : kFixtureWidth;
    if (gripper.closing) {
      gripper.opening = std::max(gripper.opening, width);
    } else if (gripper.opening > width) {
      if (it != fixtures.end()) it->attached_gripper.reset();
      gripper.grasped_fixture.reset();
    }
    return ev;
  }
  if (!gripper.closing) return ev;

  for (auto& f : fixtures) {
    if (f.attached_gripper) continue;
    if (!(before > f.width && gripper.opening <= f.width)) continue;
    auto err = kin::pose_distance(tip, f.pose);
    if (err.position > kGraspPositionTol || err.rotation > kGraspAngleTol) continue;
    gripper.opening = f.width;
    gripper.grasped_fixture = f.id;
    f.attached_gripper = gripper.id;
    ev.fixture = f.id;
    ev.ir = IrMessage{t, gripper.id.module, f.id.module, {gripper.id.module}};
    break;
  }
  return ev;
}

Plant::Plant(const model::RobotDescription& desc, std::uint64_t seed) : rng_(seed) {
  for (const auto& m : desc.modules) {
    kinds_[m.id] = m.kind;
    batteries_[m.id] = Battery{};
    neighbors_[m.id];
    for (const auto& js : m.joints) {
      JointPlant j;
      j.module = m.id;
      j.name = js.name;
      j.v_max = js.v_max;
      j.limits = js.limits;
      joints_.emplace(j.key(), j);
    }
    if (m.kind == model::ModuleKind::limb) {
      grippers_.push_back(GripperPlant{{m.id, "gripper1"}, kGripperMaxOpening, kGripperSpeed, false, std::nullopt});
      grippers_.push_back(GripperPlant{{m.id, "gripper2"}, kGripperMaxOpening, kGripperSpeed, false, std::nullopt});
    } else if (m.kind == model::ModuleKind::gripper_tool) {
      grippers_.push_back(GripperPlant{{m.id, "gripper1"}, kGripperMaxOpening, kGripperSpeed, false, std::nullopt});
    }
    if (m.kind == model::ModuleKind::wheel) {
      WheelPlant w;
      w.module = m.id;
      wheels_.emplace(m.id, w);
    }
    for (const auto& f : m.fixtures) fixtures_.push_back(FixturePlant{{m.id, f}, kin::Pose{}, kFixtureWidth, std::nullopt});
  }
  for (const auto& a : desc.attachments) {
    auto* g = gripper(a.gripper);
    auto* f = fixture(a.fixture);
    if (!g || !f) continue;
    g->closing = true;
    g->opening = f->width;
    g->grasped_fixture = f->id;
    f->attached_gripper = g->id;
    link(g->id.module, f->id.module, 0.0, nullptr);
  }
}

JointPlant& Plant::joint(const std::string& module, const std::string& name) {
  auto it = joints_.find(module + "/" + name);
  if (it == joints_.end()) throw Error("unknown joint '" + module + "/" + name + "'");
  return it->second;
}

const JointPlant& Plant::joint(const std::string& module, const std::string& name) const {
  return const_cast<Plant*>(this)->joint(module, name);
}

GripperPlant* Plant::gripper(const model::Endpoint& id) {
  for (auto& g : grippers_)
    if (g.id == id) return &g;
  return nullptr;
}

FixturePlant* Plant::fixture(const model::Endpoint& id) {
  for (auto& f : fixtures_)
    if (f.id == id) return &f;
  return nullptr;
}

void Plant::add_fixture(FixturePlant f, std::optional<model::Endpoint> held_by) {
  if (fixture(f.id)) throw Error("duplicate fixture '" + f.id.str() + "'");
  neighbors_[f.id.module];
  fixtures_.push_back(std::move(f));
  if (!held_by) return;
  auto* g = gripper(*held_by);
  if (!g) throw Error("unknown gripper '" + held_by->str() + "'");
  auto& fx = fixtures_.back();
  g->closing = true;
  g->opening = fx.width;
  g->grasped_fixture = fx.id;
  fx.attached_gripper = g->id;
  link(g->id.module, fx.id.module, 0.0, nullptr);
}

void Plant::place_limb(const std::string& module, const kin::Pose& base, model::KinematicChain chain) {
  placements_[module] = {base, std::move(chain)};
}

std::optional<kin::Pose> Plant::tip_pose(const std::string& module) const {
  auto it = placements_.find(module);
  if (it == placements_.end()) return std::nullopt;
  const auto& [base, chain] = it->second;
  kin::JointVector q(static_cast<Eigen::Index>(chain.size()));
  for (std::size_t i = 0; i < chain.size(); ++i)
    q[static_cast<Eigen::Index>(i)] = joint(module, chain.joints[i].name).angle;
  return base * kin::forward_kinematics(chain, q);
}

void Plant::command(const std::string& module, const std::string& name, const ctrl::CommandOut& cmd) {
  joint(module, name).setpoint = cmd;
}

void Plant::command_gripper(const model::Endpoint& id, bool close) {
  auto* g = gripper(id);
  if (!g) throw Error("unknown gripper '" + id.str() + "'");
  g->closing = close;
}

void Plant::command_wheel(const std::string& module, double left, double right) {
  auto it = wheels_.find(module);
  if (it == wheels_.end()) throw Error("unknown wheel '" + module + "'");
  it->second.left_speed = left;
  it->second.right_speed = right;
}

std::vector<SensorReading> Plant::step(double dt, double t, std::vector<IrMessage>* ir) {
  if (dt <= 0.0) throw std::invalid_argument("plant step: dt must be positive");
  auto powered = [&](const std::string& module) {
    auto it = batteries_.find(module);
    return it == batteries_.end() || !it->second.offline();
  };

  for (auto& [key, j] : joints_) {
    if (!powered(j.module)) {
      j.velocity = 0.0;
      continue;
    }
    // the local controller works in the sensed frame
    ctrl::CommandOut cmd = j.setpoint;
    model::Interval sensed_limits{j.limits.lo - j.zero_offset, j.limits.hi - j.zero_offset};
    auto next = ctrl::local_joint_step({j.sensed(), j.velocity}, cmd, sensed_limits, j.v_max, dt);
    j.angle = next.angle + j.zero_offset;
    j.velocity = next.velocity;
  }

  for (auto& [id, w] : wheels_) {
    if (powered(id)) {
      wheel_step(w, w.left_speed, w.right_speed, dt);
    } else {
      w.left_speed = w.right_speed = 0.0;
    }
  }

  for (auto& g : grippers_) {
    if (!powered(g.id.module)) continue;
    bool held_before = g.grasped_fixture.has_value();
    std::optional<model::Endpoint> lost = g.grasped_fixture;
    kin::Pose tip;
    auto placed = placements_.find(g.id.module);
    bool at_tip = placed != placements_.end() && placed->second.second.tip_frame == g.id.str();
    if (at_tip) tip = *tip_pose(g.id.module);
    // grippers whose pose is unknown can only hold or release, never acquire
    std::vector<FixturePlant> none;
    GraspEvent ev = grasp_detect(g, tip, at_tip || held_before ? fixtures_ : none, dt, t);
    if (ev.fixture) link(g.id.module, ev.fixture->module, t, ir);
    if (held_before && !g.grasped_fixture) unlink(g.id.module, lost->module);
  }

  for (auto& [id, b] : batteries_) b.level = std::max(0.0, b.level - b.drain_rate * dt);

  return sense(t);
}

std::vector<SensorReading> Plant::sense(double t) {
  std::vector<SensorReading> out;
  out.reserve(joints_.size());
  std::uniform_real_distribution<double> jitter(-noise_, noise_);
  for (const auto& [key, j] : joints_) {
    auto b = batteries_.find(j.module);
    if (b != batteries_.end() && b->second.offline()) continue;
    double reading = j.sensed() + (noise_ > 0.0 ? jitter(rng_) : 0.0);
    out.push_back({j.module, j.name, t, reading, j.velocity, j.reflector.lit(j.angle)});
  }
  return out;
}

const std::set<std::string>& Plant::neighbors(const std::string& module) const {
  static const std::set<std::string> empty;
  auto it = neighbors_.find(module);
  return it == neighbors_.end() ? empty : it->second;
}

void Plant::link(const std::string& a, const std::string& b, double t, std::vector<IrMessage>* ir) {
  neighbors_[a].insert(b);
  neighbors_[b].insert(a);
  if (!ir) return;
  ir->push_back({t, a, b, {a}});
  ir->push_back({t, b, a, {b}});
  // a Body relays its whole neighbour list so every attached module learns the topology
  for (const auto& m : {a, b}) {
    auto k = kinds_.find(m);
    if (k == kinds_.end() || k->second != model::ModuleKind::body) continue;
    std::vector<std::string> list(neighbors_[m].begin(), neighbors_[m].end());
    for (const auto& n : neighbors_[m]) ir->push_back({t, m, n, list});
  }
}

void Plant::unlink(const std::string& a, const std::string& b) {
  neighbors_[a].erase(b);
  neighbors_[b].erase(a);
}

}  // namespace moonstack::plant
