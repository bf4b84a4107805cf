#pragma once

#include <map>
#include <optional>

#include "moonstack/stack/node.hpp"

namespace moonstack::stack {

inline constexpr double kSilenceTimeout = 0.3;

/// Level 1. Owns one slot per joint: the newest command and when it arrived. A
/// joint that hears nothing for longer than the silence timeout is held where
/// its sensor last read.
class JointNode : public Node {
 public:
  struct Slot {
    model::JointSpec spec;
    std::optional<ctrl::CommandOut> command;  // newest valid command, clamped
    double command_sent = -1.0;               // sender's stamp, rejects reordering
    double received = -1.0;
    std::optional<double> sensor;
    std::optional<double> hold;  // latched hold-at-sensor target while silent
  };

  JointNode(std::string host, const model::KinematicChain& chain, double silence_timeout = kSilenceTimeout);

  model::Level level() const override { return model::Level::joint; }
  std::vector<std::string> subscriptions() const override;
  void receive(const bus::Envelope& envelope, double now) override;
  void tick(double now, TickOutput& out) override;

  const std::string& module() const { return module_; }
  const std::map<std::string, Slot>& slots() const { return slots_; }
  /// Future targets held for `joint`: never more than one.
  std::size_t queued_targets(const std::string& joint) const;
  bool holding(const std::string& joint) const;

 private:
  std::string module_;
  double timeout_;
  std::map<std::string, Slot> slots_;
  std::vector<GripActuation> pending_grips_;
  std::vector<Event> pending_events_;
};

}  // namespace moonstack::stack
