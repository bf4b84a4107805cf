#pragma once

#include <map>
#include <optional>

#include "moonstack/stack/limb_node.hpp"

namespace moonstack::stack {

struct MoverPlan {
  std::map<std::string, std::vector<double>> targets;
  double common_duration = 0.0;
  std::map<std::string, LimbTrajectory> trajectories;
};

/// Schedule every limb over the duration of the slowest one:
/// common_duration = max over limbs and joints of |dq| / v_max. All or nothing:
/// an unknown limb, a wrong-length target or a target outside a joint limit
/// throws ValidationError and nothing is planned.
MoverPlan mover_sync(const std::map<std::string, std::vector<double>>& targets,
                     const std::map<std::string, std::vector<double>>& current,
                     const std::map<std::string, model::KinematicChain>& chains);

/// Level 4. Accepts plans on `mover/plan` and keeps re-sending the resulting
/// trajectories until every limb has arrived.
class MoverNode : public Node {
 public:
  MoverNode(std::string host, std::vector<model::KinematicChain> chains, double arrive_tol = 1e-3);

  model::Level level() const override { return model::Level::mover; }
  std::vector<std::string> subscriptions() const override;
  void receive(const bus::Envelope& envelope, double now) override;
  void tick(double now, TickOutput& out) override;

  const std::optional<MoverPlan>& active() const { return active_; }

 private:
  bool arrived() const;

  std::map<std::string, model::KinematicChain> chains_;
  double arrive_tol_;
  std::map<std::string, std::vector<std::optional<double>>> y_;
  std::vector<PlanMsg> inbox_;
  std::optional<MoverPlan> active_;
  std::uint64_t next_id_ = 1;
  std::map<std::string, std::uint64_t> ids_;
  double started_ = 0.0;
};

}  // namespace moonstack::stack
