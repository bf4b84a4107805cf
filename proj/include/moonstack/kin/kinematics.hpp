#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "moonstack/model/description.hpp"

namespace moonstack::kin {

using JointVector = Eigen::VectorXd;
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

struct Pose {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  Eigen::Isometry3d isometry() const;
  static Pose from(const Eigen::Isometry3d& t);
  Pose operator*(const Pose& rhs) const;
  Pose inverse() const;
};

/// Translation error and the rotation angle between two poses.
struct PoseError {
  double position = 0.0;
  double rotation = 0.0;
};
PoseError pose_distance(const Pose& a, const Pose& b);

/// Tip pose in the root frame. Throws std::invalid_argument on a length mismatch.
Pose forward_kinematics(const model::KinematicChain& chain, const JointVector& q);

/// Pose of every joint frame (before its own motion) followed by the tip pose.
std::vector<Pose> joint_frames(const model::KinematicChain& chain, const JointVector& q);

/// Geometric Jacobian at the tip, rows [linear; angular], expressed in the root frame.
Jacobian jacobian(const model::KinematicChain& chain, const JointVector& q);

enum class IkStatus { converged, unreachable, diverged };

struct IkOptions {
  double pos_tol = 1e-4;
  double rot_tol = 1e-3;
  int max_iters = 200;
  double damping = 1e-3;
  bool orientation = true;  // false: position-only, angular rows masked out
  double max_step = 0.5;    // rad (or m) cap on the joint update norm
};

struct IkResult {
  IkStatus status = IkStatus::unreachable;
  JointVector q;
  int iterations = 0;
  PoseError error;

  bool ok() const { return status == IkStatus::converged; }
};

/// Damped least-squares solve from `seed`. Iterates are clamped to joint limits.
IkResult inverse_kinematics(const model::KinematicChain& chain, const Pose& target, const JointVector& seed,
                            const IkOptions& opts = {});

/// Six-vector task-space error (position, rotation vector) from `current` to `target`.
Eigen::Matrix<double, 6, 1> twist_error(const Pose& current, const Pose& target);

/// One damped least-squares update for a task-space displacement.
JointVector dls_step(const Jacobian& jac, const Eigen::Matrix<double, 6, 1>& err, double damping,
                     bool orientation = true);

JointVector clamp_to_limits(const model::KinematicChain& chain, JointVector q);

const char* to_string(IkStatus status);

}  // namespace moonstack::kin
