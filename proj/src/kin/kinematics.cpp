#include "moonstack/kin/kinematics.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <stdexcept>

namespace moonstack::kin {

namespace {

Eigen::Vector3d axis_of(const model::JointSpec& j) { return {j.axis[0], j.axis[1], j.axis[2]}; }

void check_length(const model::KinematicChain& chain, const JointVector& q) {
  if (static_cast<std::size_t>(q.size()) != chain.size())
    throw std::invalid_argument("joint vector has " + std::to_string(q.size()) + " values, chain has " +
                                std::to_string(chain.size()) + " joints");
}

double task_norm(const Eigen::Matrix<double, 6, 1>& e, bool orientation) {
  return orientation ? e.norm() : e.head<3>().norm();
}

}  // namespace

Eigen::Isometry3d Pose::isometry() const {
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.linear() = orientation.toRotationMatrix();
  t.translation() = position;
  return t;
}

Pose Pose::from(const Eigen::Isometry3d& t) {
  Pose p;
  p.position = t.translation();
  p.orientation = Eigen::Quaterniond(t.rotation()).normalized();
  return p;
}

Pose Pose::operator*(const Pose& rhs) const {
  Pose out;
  out.position = position + orientation * rhs.position;
  out.orientation = (orientation * rhs.orientation).normalized();
  return out;
}

Pose Pose::inverse() const {
  Pose out;
  out.orientation = orientation.conjugate();
  out.position = -(out.orientation * position);
  return out;
}

PoseError pose_distance(const Pose& a, const Pose& b) {
  return {(a.position - b.position).norm(), a.orientation.angularDistance(b.orientation)};
}

std::vector<Pose> joint_frames(const model::KinematicChain& chain, const JointVector& q) {
  check_length(chain, q);
  std::vector<Pose> frames;
  frames.reserve(chain.size() + 1);
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.translate(Eigen::Vector3d(chain.base_offset, 0.0, 0.0));
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto& j = chain.joints[i];
    frames.push_back(Pose::from(t));
    const double qi = q[static_cast<Eigen::Index>(i)];
    if (j.kind == model::JointKind::revolute) {
      t.rotate(Eigen::AngleAxisd(qi, axis_of(j)));
    } else {
      t.translate(axis_of(j) * qi);
    }
    t.translate(Eigen::Vector3d(j.link_length, 0.0, 0.0));
  }
  frames.push_back(Pose::from(t));
  return frames;
}

Pose forward_kinematics(const model::KinematicChain& chain, const JointVector& q) {
  return joint_frames(chain, q).back();
}

Jacobian jacobian(const model::KinematicChain& chain, const JointVector& q) {
  auto frames = joint_frames(chain, q);
  const Eigen::Vector3d tip = frames.back().position;
  Jacobian jac(6, static_cast<Eigen::Index>(chain.size()));
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    const Eigen::Vector3d z = frames[i].orientation * axis_of(chain.joints[i]);
    if (chain.joints[i].kind == model::JointKind::revolute) {
      jac.block<3, 1>(0, col) = z.cross(tip - frames[i].position);
      jac.block<3, 1>(3, col) = z;
    } else {
      jac.block<3, 1>(0, col) = z;
      jac.block<3, 1>(3, col).setZero();
    }
  }
  return jac;
}

Eigen::Matrix<double, 6, 1> twist_error(const Pose& current, const Pose& target) {
  Eigen::Matrix<double, 6, 1> e;
  e.head<3>() = target.position - current.position;
  Eigen::Quaterniond d = target.orientation * current.orientation.conjugate();
  if (d.w() < 0.0) d.coeffs() *= -1.0;
  Eigen::AngleAxisd aa(d.normalized());
  e.tail<3>() = aa.axis() * aa.angle();
  return e;
}

JointVector dls_step(const Jacobian& jac, const Eigen::Matrix<double, 6, 1>& err, double damping, bool orientation) {
  const Eigen::Index rows = orientation ? 6 : 3;
  const Eigen::MatrixXd j = jac.topRows(rows);
  Eigen::MatrixXd jjt = j * j.transpose();
  jjt.diagonal().array() += damping * damping;
  return j.transpose() * jjt.ldlt().solve(err.head(rows));
}

JointVector clamp_to_limits(const model::KinematicChain& chain, JointVector q) {
  check_length(chain, q);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    auto k = static_cast<Eigen::Index>(i);
    q[k] = chain.joints[i].limits.clamp(q[k]);
  }
  return q;
}

IkResult inverse_kinematics(const model::KinematicChain& chain, const Pose& target, const JointVector& seed,
                            const IkOptions& opts) {
  check_length(chain, seed);
  IkResult result;
  result.q = clamp_to_limits(chain, seed);

  auto measure = [&](const JointVector& q) {
    Pose p = forward_kinematics(chain, q);
    PoseError pe = pose_distance(p, target);
    if (!opts.orientation) pe.rotation = 0.0;
    return std::pair{twist_error(p, target), pe};
  };
  auto converged = [&](const PoseError& pe) { return pe.position <= opts.pos_tol && pe.rotation <= opts.rot_tol; };

  auto [err, pe] = measure(result.q);
  result.error = pe;
  if (converged(pe)) {
    result.status = IkStatus::converged;
    return result;
  }
  // Nothing within the reach sphere can be farther than the straightened chain.
  if (target.position.norm() > chain.reach() + opts.pos_tol) {
    result.status = IkStatus::unreachable;
    return result;
  }

  double lambda = opts.damping;
  int increases = 0;
  double norm = task_norm(err, opts.orientation);
  for (int it = 1; it <= opts.max_iters; ++it) {
    result.iterations = it;
    JointVector dq = dls_step(jacobian(chain, result.q), err, lambda, opts.orientation);
    if (double n = dq.norm(); n > opts.max_step) dq *= opts.max_step / n;
    result.q = clamp_to_limits(chain, result.q + dq);
    std::tie(err, pe) = measure(result.q);
    result.error = pe;
    if (converged(pe)) {
      result.status = IkStatus::converged;
      return result;
    }
    double next = task_norm(err, opts.orientation);
    if (next > norm) {
      lambda *= 10.0;
      if (++increases >= 20) {
        result.status = IkStatus::diverged;
        return result;
      }
    } else {
      lambda = std::max(lambda / 10.0, opts.damping);
      increases = 0;
    }
    norm = next;
  }
  result.status = IkStatus::unreachable;
  return result;
}

const char* to_string(IkStatus status) {
  switch (status) {
    case IkStatus::converged: return "converged";
    case IkStatus::unreachable: return "unreachable";
    case IkStatus::diverged: return "diverged";
  }
  return "?";
}

}  // namespace moonstack::kin
