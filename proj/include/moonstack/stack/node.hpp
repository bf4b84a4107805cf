#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "moonstack/bus/bus.hpp"
#include "moonstack/ctrl/strategy.hpp"
#include "moonstack/model/description.hpp"
#include "moonstack/model/roles.hpp"

namespace moonstack::stack {

/// Something a node wants the operators or mission control to see.
struct Event {
  double t = 0.0;
  std::string node;
  std::string kind;  // e.g. "unknown-joint", "ik-unreachable", "calibrated"
  std::string detail;

  bool operator==(const Event&) const = default;
};

struct JointActuation {
  std::string module;
  std::string joint;
  ctrl::CommandOut command;
};

struct WheelActuation {
  std::string module;
  double left = 0.0;
  double right = 0.0;
};

struct GripActuation {
  model::Endpoint gripper;
  bool close = false;
};

/// Everything a node produced during one tick.
struct TickOutput {
  std::vector<std::pair<std::string, std::string>> messages;  // topic, payload
  std::vector<JointActuation> joints;
  std::vector<WheelActuation> wheels;
  std::vector<GripActuation> grippers;
  std::vector<Event> events;

  void publish(std::string topic, std::string payload) { messages.emplace_back(std::move(topic), std::move(payload)); }
  void clear() {
    messages.clear();
    joints.clear();
    wheels.clear();
    grippers.clear();
    events.clear();
  }
};

/// One stack level running on one computer. Nodes never call each other; they
/// see envelopes and emit a TickOutput.
class Node {
 public:
  explicit Node(std::string host) : host_(std::move(host)) {}
  virtual ~Node() = default;
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  const std::string& host() const { return host_; }
  virtual model::Level level() const = 0;
  /// Topic patterns this node listens to.
  virtual std::vector<std::string> subscriptions() const = 0;
  virtual void receive(const bus::Envelope& envelope, double now) = 0;
  virtual void tick(double now, TickOutput& out) = 0;

  bool wants(std::string_view topic) const;

 protected:
  Event event(double t, std::string kind, std::string detail) const { return {t, host_, std::move(kind), std::move(detail)}; }

 private:
  std::string host_;
  mutable std::vector<std::string> patterns_;  // cached subscriptions()
};

}  // namespace moonstack::stack
