#pragma once

#include <map>
#include <optional>

#include "moonstack/kin/kinematics.hpp"
#include "moonstack/stack/messages.hpp"
#include "moonstack/stack/node.hpp"

namespace moonstack::stack {

enum class InputOp { down, up, plan, ik_target, ik_release, grip };

std::string_view to_string(InputOp op);
InputOp parse_input_op(std::string_view text);

/// One operator action. Targets are "limb1/joint3" (joint), "ik/limb1/x" with
/// axes x y z rx ry rz (tip nudges), "wheel1/drive" or "wheel1/turn" (wheel
/// speed), a limb id (ik_target / ik_release) or "limb1/gripper2" (grip).
struct InputEvent {
  double t = 0.0;
  std::string op_id;  // operator node the event belongs to
  InputOp op = InputOp::down;
  std::string target;
  double speed = 0.0;  // signed, rad/s (m/s for linear IK axes)
  std::map<std::string, std::vector<double>> plan;
  kin::Pose pose;
  bool close = true;
};

/// What the remote controller decided on one tick, for traces and oracles.
struct CommandRecord {
  double t = 0.0;
  std::string target;
  double y = 0.0;
  double r_dot = 0.0;
  ctrl::CommandOut u;
};

/// Level 5. Turns held keys into velocity targets and runs the remote
/// controller strategy against the latest sensor reading it has received.
class OperatorNode : public Node {
 public:
  OperatorNode(std::string host, const model::RobotDescription& desc, ctrl::StrategyKind strategy,
               ctrl::StrategyParams params = {}, double tick = 0.02);

  model::Level level() const override { return model::Level::operator_; }
  std::vector<std::string> subscriptions() const override { return {"sensor/*"}; }
  void receive(const bus::Envelope& envelope, double now) override;
  void tick(double now, TickOutput& out) override;

  /// Queue an input; it takes effect on the first tick at or after `ev.t`.
  void input(InputEvent ev);
  /// Release every held key at time t (a console disconnecting).
  void release_all(double t);

  const std::vector<CommandRecord>& trace() const { return trace_; }
  void set_tracing(bool on) { tracing_ = on; }
  ctrl::StrategyKind strategy() const { return strategy_; }
  /// Keys currently held.
  std::vector<std::string> held() const;

 private:
  enum class TargetKind { joint, ik, wheel };
  struct Binding {
    TargetKind kind = TargetKind::joint;
    std::string module;
    std::string name;  // joint name, IK axis or drive/turn
    bool held = false;
    double speed = 0.0;
    double since = 0.0;
    double displacement = 0.0;  // integral of the target over the current tick
    std::optional<ctrl::StrategyState> strategy;
  };

  std::optional<Binding> resolve(const std::string& target) const;
  void apply(const InputEvent& ev, double t_prev, TickOutput& out);

  model::RobotDescription desc_;
  ctrl::StrategyKind strategy_;
  ctrl::StrategyParams params_;
  double tick_;
  double t_prev_ = 0.0;
  bool started_ = false;
  std::vector<InputEvent> queue_;
  std::map<std::string, Binding> bindings_;
  std::map<std::string, double> y_;  // "module/joint" -> latest sensed angle
  std::map<std::string, InputEvent> ik_targets_;
  std::vector<CommandRecord> trace_;
  bool tracing_ = true;
};

}  // namespace moonstack::stack
