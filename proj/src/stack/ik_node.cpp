#include "moonstack/stack/ik_node.hpp"

#include <algorithm>

namespace moonstack::stack {

IkNode::IkNode(std::string host, model::KinematicChain chain, double delta_e, double timeout)
    : Node(std::move(host)), chain_(std::move(chain)), delta_e_(delta_e), timeout_(timeout), y_(chain_.size()) {}

std::vector<std::string> IkNode::subscriptions() const {
  return {topic::ik(chain_.module), "sensor/" + chain_.module + "/*"};
}

void IkNode::receive(const bus::Envelope& e, double now) {
  auto parts = topic::split(e.topic);
  if (parts[0] == "sensor") {
    if (parts.size() != 3) return;
    for (std::size_t i = 0; i < chain_.size(); ++i)
      if (chain_.joints[i].name == parts[2]) y_[i] = decode_sensor(e.payload).angle;
    return;
  }
  IkMsg m = decode_ik(e.payload);
  if (m.mode == IkMsg::Mode::nudge) {
    nudge_ += m.nudge;
    nudge_pending_ = true;
    return;
  }
  bool changed = !target_ || (target_->target.position - m.target.position).norm() > 1e-12 ||
                 target_->target.orientation.angularDistance(m.target.orientation) > 1e-12;
  target_ = m;
  target_received_ = now;
  target_dirty_ = target_dirty_ || changed;
}

bool IkNode::sensed_all() const {
  return std::all_of(y_.begin(), y_.end(), [](const auto& v) { return v.has_value(); });
}

kin::JointVector IkNode::sensed() const {
  kin::JointVector q(static_cast<Eigen::Index>(y_.size()));
  for (std::size_t i = 0; i < y_.size(); ++i) q[static_cast<Eigen::Index>(i)] = *y_[i];
  return q;
}

kin::JointVector IkNode::nudge_delta(const kin::JointVector& q, const Eigen::Matrix<double, 6, 1>& nudge) const {
  return kin::dls_step(kin::jacobian(chain_, q), nudge, 1e-3);
}

void IkNode::emit(double now, const kin::JointVector& wanted, TickOutput& out) {
  kin::JointVector y = sensed();
  kin::JointVector u = wanted;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    const auto& spec = chain_.joints[static_cast<std::size_t>(i)];
    u[i] = spec.limits.clamp(std::clamp(u[i], y[i] - delta_e_, y[i] + delta_e_));
    out.publish(topic::cmd(chain_.module, spec.name),
                encode(JointCommandMsg{now, {ctrl::CommandKind::position, u[i]}}));
  }
  u_prev_ = u;
  last_output_ = now;
}

void IkNode::tick(double now, TickOutput& out) {
  if (!sensed_all()) return;
  kin::JointVector y = sensed();
  // after a pause the integrator restarts from where the limb actually is
  if (!u_prev_ || now - last_output_ > timeout_ + 1e-9) u_prev_ = y;

  if (target_ && now - target_received_ > timeout_ + 1e-9) {
    target_.reset();  // stale targets expire instead of being chased
    solution_.reset();
  }
  if (target_ && target_dirty_) {
    target_dirty_ = false;
    auto r = kin::inverse_kinematics(chain_, target_->target, y);
    if (r.ok()) {
      solution_ = r.q;
    } else {
      solution_.reset();
      target_.reset();
      out.events.push_back(event(now, "ik-" + std::string(kin::to_string(r.status)), chain_.module));
      emit(now, y, out);  // hold
      nudge_pending_ = false;
      nudge_.setZero();
      return;
    }
  }

  if (nudge_pending_) {
    emit(now, *u_prev_ + nudge_delta(y, nudge_), out);
    nudge_pending_ = false;
    nudge_.setZero();
  } else if (solution_) {
    emit(now, *solution_, out);
  }
}

}  // namespace moonstack::stack
