#pragma once

#include <optional>

#include "moonstack/stack/joint_node.hpp"
#include "moonstack/stack/messages.hpp"

namespace moonstack::stack {

struct LimbTrajectory {
  std::vector<std::string> joints;  // chain order
  std::vector<Waypoint> waypoints;  // times strictly increasing
  std::size_t issued_up_to = 0;     // index of the segment being streamed

  double duration() const { return waypoints.empty() ? 0.0 : waypoints.back().t; }
};

/// Throws ValidationError naming the first bad waypoint: wrong joint set, time
/// not strictly increasing, or a joint outside its limits.
void validate_trajectory(const LimbTrajectory& traj, const model::KinematicChain& chain);

/// Streams one trajectory at the level-1 tick rate. Trajectory time only moves
/// forward while the sensed joints are within delta_e of the setpoint, so a
/// limb that stops responding stalls the stream instead of running ahead of it.
class LimbExecutor {
 public:
  LimbExecutor(LimbTrajectory traj, std::vector<double> start, double delta_e = 0.05);

  /// Next per-joint command for sensed angles `y`, empty once done.
  std::optional<std::vector<double>> step(double dt, const std::vector<double>& y);
  bool done() const { return done_; }
  double progress() const { return tau_; }
  const LimbTrajectory& trajectory() const { return traj_; }
  std::vector<double> setpoint() const;

 private:
  LimbTrajectory traj_;
  double delta_e_;
  double tau_ = 0.0;
  bool done_ = false;
};

/// Level 3. Executes the trajectory received on `traj/<limb>` while its sender
/// keeps re-sending it; a silent sender stops the limb.
class LimbNode : public Node {
 public:
  LimbNode(std::string host, model::KinematicChain chain, double delta_e = 0.05, double timeout = kSilenceTimeout,
           double tick = 0.02);

  model::Level level() const override { return model::Level::limb; }
  std::vector<std::string> subscriptions() const override;
  void receive(const bus::Envelope& envelope, double now) override;
  void tick(double now, TickOutput& out) override;

  const std::optional<LimbExecutor>& executor() const { return executor_; }
  std::optional<std::uint64_t> active_id() const { return active_id_; }

 private:
  void publish(double now, const std::vector<double>& u, TickOutput& out) const;

  model::KinematicChain chain_;
  double delta_e_;
  double timeout_;
  double tick_;
  std::vector<std::optional<double>> y_;
  std::optional<TrajectoryMsg> incoming_;
  std::optional<LimbExecutor> executor_;
  std::optional<std::uint64_t> active_id_;
  double lease_ = -1.0;
  bool stalled_ = false;
  std::vector<Event> pending_events_;
};

}  // namespace moonstack::stack
