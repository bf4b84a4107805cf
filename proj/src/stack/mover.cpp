#include "moonstack/stack/mover.hpp"

#include <cmath>

#include "moonstack/error.hpp"

namespace moonstack::stack {

MoverPlan mover_sync(const std::map<std::string, std::vector<double>>& targets,
                     const std::map<std::string, std::vector<double>>& current,
                     const std::map<std::string, model::KinematicChain>& chains) {
  if (targets.empty()) throw ValidationError("targets", "a plan needs at least one limb");
  MoverPlan plan;
  plan.targets = targets;
  for (const auto& [limb, q] : targets) {
    std::string path = "targets." + limb;
    auto c = chains.find(limb);
    if (c == chains.end()) throw ValidationError(path, "no kinematic chain for '" + limb + "'");
    auto y = current.find(limb);
    if (y == current.end()) throw ValidationError(path, "no sensor state for '" + limb + "'");
    const auto& chain = c->second;
    if (q.size() != chain.size()) throw ValidationError(path, "expected " + std::to_string(chain.size()) + " joints");
    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto& spec = chain.joints[i];
      if (!spec.limits.contains(q[i]))
        throw ValidationError(path + "[" + std::to_string(i) + "]", "outside the limits of " + spec.name);
      plan.common_duration = std::max(plan.common_duration, std::abs(q[i] - y->second.at(i)) / spec.v_max);
    }
  }
  for (const auto& [limb, q] : targets) {
    const auto& chain = chains.at(limb);
    LimbTrajectory t;
    for (const auto& j : chain.joints) t.joints.push_back(j.name);
    if (plan.common_duration > 0.0) {
      t.waypoints = {{0.0, current.at(limb)}, {plan.common_duration, q}};
    } else {
      t.waypoints = {{0.0, q}};
    }
    plan.trajectories.emplace(limb, std::move(t));
  }
  return plan;
}

MoverNode::MoverNode(std::string host, std::vector<model::KinematicChain> chains, double arrive_tol)
    : Node(std::move(host)), arrive_tol_(arrive_tol) {
  for (auto& c : chains) {
    y_[c.module].resize(c.size());
    chains_.emplace(c.module, std::move(c));
  }
}

std::vector<std::string> MoverNode::subscriptions() const {
  std::vector<std::string> subs{std::string(topic::kMoverPlan)};
  for (const auto& [m, c] : chains_) subs.push_back("sensor/" + m + "/*");
  return subs;
}

void MoverNode::receive(const bus::Envelope& e, double) {
  if (e.topic == topic::kMoverPlan) {
    inbox_.push_back(decode_plan(e.payload));
    return;
  }
  auto parts = topic::split(e.topic);
  if (parts.size() != 3) return;
  auto c = chains_.find(std::string(parts[1]));
  if (c == chains_.end()) return;
  for (std::size_t i = 0; i < c->second.size(); ++i)
    if (c->second.joints[i].name == parts[2]) y_[c->first][i] = decode_sensor(e.payload).angle;
}

bool MoverNode::arrived() const {
  for (const auto& [limb, q] : active_->targets) {
    const auto& y = y_.at(limb);
    for (std::size_t i = 0; i < q.size(); ++i)
      if (!y[i] || std::abs(*y[i] - q[i]) > arrive_tol_) return false;
  }
  return true;
}

void MoverNode::tick(double now, TickOutput& out) {
  for (const auto& msg : inbox_) {
    std::map<std::string, std::vector<double>> current;
    for (const auto& [limb, ys] : y_) {
      std::vector<double> q;
      for (const auto& v : ys) {
        if (!v) break;
        q.push_back(*v);
      }
      if (q.size() == ys.size()) current.emplace(limb, std::move(q));
    }
    try {
      MoverPlan plan = mover_sync(msg.targets, current, chains_);
      active_ = std::move(plan);
      started_ = now;
      ids_.clear();
      for (const auto& [limb, t] : active_->trajectories) ids_[limb] = next_id_++;
      out.events.push_back(event(now, "plan-accepted", std::to_string(active_->common_duration)));
    } catch (const ValidationError& err) {
      out.events.push_back(event(now, "plan-rejected", err.what()));
    }
  }
  inbox_.clear();
  if (!active_) return;
  if (arrived()) {
    out.events.push_back(event(now, "plan-done", ""));
    active_.reset();
    return;
  }
  if (now - started_ > 2.0 * active_->common_duration + 2.0) {
    out.events.push_back(event(now, "plan-abandoned", ""));
    active_.reset();
    return;
  }
  for (const auto& [limb, t] : active_->trajectories)
    out.publish(topic::traj(limb), encode(TrajectoryMsg{now, ids_.at(limb), t.joints, t.waypoints}));
}

}  // namespace moonstack::stack
