#include "moonstack/stack/joint_node.hpp"

#include "moonstack/stack/messages.hpp"

namespace moonstack::stack {

JointNode::JointNode(std::string host, const model::KinematicChain& chain, double silence_timeout)
    : Node(std::move(host)), module_(chain.module), timeout_(silence_timeout) {
  for (const auto& j : chain.joints) slots_[j.name].spec = j;
}

std::vector<std::string> JointNode::subscriptions() const {
  return {"cmd/" + module_ + "/*", "calib/" + module_ + "/*", "sensor/" + module_ + "/*", "grip/" + module_ + "/*"};
}

void JointNode::receive(const bus::Envelope& e, double now) {
  auto parts = topic::split(e.topic);
  if (parts.size() != 3) return;
  std::string name(parts[2]);
  if (parts[0] == "grip") {
    pending_grips_.push_back({{module_, name}, decode_grip(e.payload).close});
    return;
  }
  auto it = slots_.find(name);
  if (parts[0] == "sensor") {
    if (it != slots_.end()) it->second.sensor = decode_sensor(e.payload).angle;
    return;
  }
  if (it == slots_.end()) {
    pending_events_.push_back(event(now, "unknown-joint", e.topic));
    return;
  }
  auto msg = decode_joint_command(e.payload);
  Slot& s = it->second;
  if (msg.t < s.command_sent) return;  // older than what we already hold
  ctrl::CommandOut c = msg.command;
  if (c.kind == ctrl::CommandKind::position) {
    c.value = s.spec.limits.clamp(c.value);
  } else {
    c.value = std::clamp(c.value, -s.spec.v_max, s.spec.v_max);
  }
  s.command = c;
  s.command_sent = msg.t;
  s.received = now;
  s.hold.reset();
}

void JointNode::tick(double now, TickOutput& out) {
  for (auto& [name, s] : slots_) {
    if (!s.command) continue;
    if (now - s.received > timeout_ + 1e-9) {
      if (!s.hold) {
        s.hold = s.sensor.value_or(s.command->kind == ctrl::CommandKind::position ? s.command->value : 0.0);
        s.hold = s.spec.limits.clamp(*s.hold);
        out.events.push_back(event(now, "silence-hold", module_ + "/" + name));
      }
      out.joints.push_back({module_, name, {ctrl::CommandKind::position, *s.hold}});
    } else {
      out.joints.push_back({module_, name, *s.command});
    }
  }
  for (auto& g : pending_grips_) out.grippers.push_back(std::move(g));
  pending_grips_.clear();
  for (auto& e : pending_events_) out.events.push_back(std::move(e));
  pending_events_.clear();
}

std::size_t JointNode::queued_targets(const std::string& joint) const {
  auto it = slots_.find(joint);
  return it != slots_.end() && it->second.command ? 1 : 0;
}

bool JointNode::holding(const std::string& joint) const {
  auto it = slots_.find(joint);
  return it != slots_.end() && it->second.hold.has_value();
}

}  // namespace moonstack::stack
