#pragma once

#include <optional>

#include "moonstack/kin/kinematics.hpp"
#include "moonstack/stack/joint_node.hpp"
#include "moonstack/stack/messages.hpp"

namespace moonstack::stack {

/// Level 2. Turns tip nudges and tip targets on `ik/<limb>` into joint position
/// commands. Every output joint stays within delta_e of its sensed angle, so a
/// stale target can never command a large jump.
class IkNode : public Node {
 public:
  IkNode(std::string host, model::KinematicChain chain, double delta_e = 0.05, double timeout = kSilenceTimeout);

  model::Level level() const override { return model::Level::ik; }
  std::vector<std::string> subscriptions() const override;
  void receive(const bus::Envelope& envelope, double now) override;
  void tick(double now, TickOutput& out) override;

  const model::KinematicChain& chain() const { return chain_; }
  /// Joint increments one nudge would ask for from configuration `q`.
  kin::JointVector nudge_delta(const kin::JointVector& q, const Eigen::Matrix<double, 6, 1>& nudge) const;
  const std::optional<kin::JointVector>& solution() const { return solution_; }

 private:
  bool sensed_all() const;
  kin::JointVector sensed() const;
  void emit(double now, const kin::JointVector& wanted, TickOutput& out);

  model::KinematicChain chain_;
  double delta_e_;
  double timeout_;
  std::vector<std::optional<double>> y_;
  std::optional<kin::JointVector> u_prev_;
  double last_output_ = -1.0;
  Eigen::Matrix<double, 6, 1> nudge_ = Eigen::Matrix<double, 6, 1>::Zero();
  bool nudge_pending_ = false;
  std::optional<IkMsg> target_;
  double target_received_ = -1.0;
  bool target_dirty_ = false;
  std::optional<kin::JointVector> solution_;
};

}  // namespace moonstack::stack
