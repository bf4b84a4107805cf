#include "moonstack/stack/limb_node.hpp"

#include <algorithm>
#include <cmath>

#include "moonstack/error.hpp"

namespace moonstack::stack {

void validate_trajectory(const LimbTrajectory& traj, const model::KinematicChain& chain) {
  if (traj.joints.size() != chain.size()) throw ValidationError("joints", "expected " + std::to_string(chain.size()) + " joints");
  for (std::size_t i = 0; i < chain.size(); ++i)
    if (traj.joints[i] != chain.joints[i].name)
      throw ValidationError("joints[" + std::to_string(i) + "]", "expected '" + chain.joints[i].name + "'");
  double prev = -1.0;
  for (std::size_t k = 0; k < traj.waypoints.size(); ++k) {
    const auto& w = traj.waypoints[k];
    std::string path = "waypoints[" + std::to_string(k) + "]";
    if (w.q.size() != chain.size()) throw ValidationError(path + ".q", "wrong length");
    if (!(w.t > prev) || w.t < 0.0) throw ValidationError(path + ".t", "times must be strictly increasing");
    prev = w.t;
    for (std::size_t i = 0; i < chain.size(); ++i)
      if (!chain.joints[i].limits.contains(w.q[i]))
        throw ValidationError(path + ".q[" + std::to_string(i) + "]", "outside the limits of " + chain.joints[i].name);
  }
}

LimbExecutor::LimbExecutor(LimbTrajectory traj, std::vector<double> start, double delta_e)
    : traj_(std::move(traj)), delta_e_(delta_e) {
  if (traj_.waypoints.empty()) {
    done_ = true;
    return;
  }
  if (traj_.waypoints.front().t > 0.0) traj_.waypoints.insert(traj_.waypoints.begin(), Waypoint{0.0, std::move(start)});
}

std::vector<double> LimbExecutor::setpoint() const {
  const auto& w = traj_.waypoints;
  if (tau_ >= w.back().t) return w.back().q;
  auto hi = std::upper_bound(w.begin(), w.end(), tau_, [](double t, const Waypoint& p) { return t < p.t; });
  if (hi == w.begin()) return w.front().q;
  auto lo = hi - 1;
  double s = (tau_ - lo->t) / (hi->t - lo->t);
  std::vector<double> q(lo->q.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = lo->q[i] + s * (hi->q[i] - lo->q[i]);
  return q;
}

std::optional<std::vector<double>> LimbExecutor::step(double dt, const std::vector<double>& y) {
  if (done_) return std::nullopt;
  auto sp = setpoint();
  bool tracking = true;
  for (std::size_t i = 0; i < y.size(); ++i) tracking = tracking && std::abs(y[i] - sp[i]) <= delta_e_ + 1e-12;
  if (tracking) {
    double end = traj_.waypoints.back().t;
    if (tau_ >= end) {
      bool arrived = true;
      for (std::size_t i = 0; i < y.size(); ++i) arrived = arrived && std::abs(y[i] - sp[i]) <= 1e-9;
      if (arrived) {
        done_ = true;
        return std::nullopt;
      }
    }
    tau_ = std::min(end, tau_ + dt);
    sp = setpoint();
    auto hi = std::upper_bound(traj_.waypoints.begin(), traj_.waypoints.end(), tau_,
                               [](double t, const Waypoint& p) { return t < p.t; });
    traj_.issued_up_to = static_cast<std::size_t>(hi - traj_.waypoints.begin());
  }
  for (std::size_t i = 0; i < y.size(); ++i) sp[i] = std::clamp(sp[i], y[i] - delta_e_, y[i] + delta_e_);
  return sp;
}

LimbNode::LimbNode(std::string host, model::KinematicChain chain, double delta_e, double timeout, double tick)
    : Node(std::move(host)), chain_(std::move(chain)), delta_e_(delta_e), timeout_(timeout), tick_(tick), y_(chain_.size()) {}

std::vector<std::string> LimbNode::subscriptions() const {
  return {topic::traj(chain_.module), "sensor/" + chain_.module + "/*"};
}

void LimbNode::receive(const bus::Envelope& e, double now) {
  auto parts = topic::split(e.topic);
  if (parts[0] == "sensor") {
    if (parts.size() != 3) return;
    for (std::size_t i = 0; i < chain_.size(); ++i)
      if (chain_.joints[i].name == parts[2]) y_[i] = decode_sensor(e.payload).angle;
    return;
  }
  auto m = decode_trajectory(e.payload);
  if (active_id_ && *active_id_ == m.id) {
    lease_ = now;
    return;
  }
  LimbTrajectory t{m.joints, m.waypoints, 0};
  try {
    validate_trajectory(t, chain_);
  } catch (const ValidationError& err) {
    pending_events_.push_back(event(now, "trajectory-rejected", err.what()));
    return;
  }
  incoming_ = std::move(m);
  lease_ = now;
}

void LimbNode::publish(double now, const std::vector<double>& u, TickOutput& out) const {
  for (std::size_t i = 0; i < u.size(); ++i)
    out.publish(topic::cmd(chain_.module, chain_.joints[i].name),
                encode(JointCommandMsg{now, {ctrl::CommandKind::position, u[i]}}));
}

void LimbNode::tick(double now, TickOutput& out) {
  for (auto& e : pending_events_) out.events.push_back(std::move(e));
  pending_events_.clear();
  if (!std::all_of(y_.begin(), y_.end(), [](const auto& v) { return v.has_value(); })) return;
  std::vector<double> y(y_.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = *y_[i];

  if (incoming_) {
    executor_.emplace(LimbTrajectory{incoming_->joints, incoming_->waypoints, 0}, y, delta_e_);
    active_id_ = incoming_->id;
    incoming_.reset();
    stalled_ = false;
  }
  if (!executor_ || executor_->done()) return;

  if (now - lease_ > timeout_ + 1e-9) {
    // the planner went quiet: hold once where the limb is, then stay silent
    if (!stalled_) {
      publish(now, y, out);
      out.events.push_back(event(now, "trajectory-stalled", chain_.module));
    }
    stalled_ = true;
    return;
  }
  stalled_ = false;
  auto u = executor_->step(tick_, y);
  if (!u) {
    out.events.push_back(event(now, "trajectory-done", chain_.module));
    return;
  }
  publish(now, *u, out);
}

}  // namespace moonstack::stack
