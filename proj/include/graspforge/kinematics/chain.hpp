#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "graspforge/geometry/pose.hpp"

namespace graspforge
{

/// Joint name -> position (rad or m).
using JointConfig = std::map<std::string, double>;

/// Rows 0-2 linear velocity, rows 3-5 angular velocity, base frame.
using Jacobian = Eigen::Matrix<double, 6, Eigen::Dynamic>;

class KinematicsError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

class IncompleteConfigError : public KinematicsError
{
public:
  explicit IncompleteConfigError(const std::string& joint)
    : KinematicsError("joint configuration is missing a value for '" + joint + "'"), joint_(joint)
  {
  }
  const std::string& joint() const { return joint_; }

private:
  std::string joint_;
};

enum class JointType
{
  revolute,
  prismatic
};

struct Joint
{
  std::string name;
  JointType type = JointType::revolute;
  Pose origin;  // from the parent link frame
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
  double lower = 0.0;
  double upper = 0.0;

  /// Transform contributed by the joint motion alone.
  Pose motion(double q) const;
};

/// Serial chain. Tip frame is the frame of the last joint after its motion,
/// followed by a fixed `tip_offset`.
class KinematicChain
{
public:
  KinematicChain() = default;

  /// Normalizes axes; throws KinematicsError on zero axes, inverted limits
  /// or duplicate joint names.
  KinematicChain(std::string base_frame, std::string tip_frame, std::vector<Joint> joints,
                 const Pose& tip_offset = Pose::identity());

  const std::string& base_frame() const { return base_frame_; }
  const std::string& tip_frame() const { return tip_frame_; }
  const std::vector<Joint>& joints() const { return joints_; }
  int dof() const { return static_cast<int>(joints_.size()); }
  const Pose& tip_offset() const { return tip_offset_; }

  const Eigen::VectorXd& lower() const { return lower_; }
  const Eigen::VectorXd& upper() const { return upper_; }

  /// Ordered joint vector; throws IncompleteConfigError when a joint is absent.
  Eigen::VectorXd positions(const JointConfig& config) const;
  JointConfig config(const Eigen::VectorXd& q) const;

  Pose forward(const Eigen::VectorXd& q) const;
  Jacobian jacobian(const Eigen::VectorXd& q) const;

  /// Frame of every joint after its motion; size == dof().
  std::vector<Pose> joint_frames(const Eigen::VectorXd& q) const;

  bool within_limits(const Eigen::VectorXd& q, double slack = 1e-12) const;
  Eigen::VectorXd clamp(const Eigen::VectorXd& q) const;

private:
  std::string base_frame_;
  std::string tip_frame_;
  std::vector<Joint> joints_;
  Pose tip_offset_;
  Eigen::VectorXd lower_;
  Eigen::VectorXd upper_;
};

Pose forward_kinematics(const KinematicChain& chain, const JointConfig& q);
Jacobian jacobian(const KinematicChain& chain, const JointConfig& q);

/// Yoshikawa manipulability as the product of the Jacobian's singular values:
/// sqrt(det(J J^T)) on the full 6xN Jacobian for chains with >= 6 joints,
/// and on the 3xN linear block otherwise (there sqrt(det(J^T J)) for N < 3).
double manipulability(const KinematicChain& chain, const Eigen::VectorXd& q);
double manipulability(const KinematicChain& chain, const JointConfig& q);

/// Radius of the velocity ellipsoid {J qdot : |qdot| <= 1} along unit
/// `direction`: 1 / sqrt(u^T (J J^T)^+ u). Zero when the direction has a
/// component along which the ellipsoid is collapsed.
double ellipsoid_radius(const Eigen::MatrixXd& task_jacobian, const Eigen::VectorXd& direction);

}  // namespace graspforge
