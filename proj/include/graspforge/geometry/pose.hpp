#pragma once

#include <Eigen/Geometry>

namespace graspforge
{

/// Rigid transform stored as a translation plus a unit quaternion.
///
/// Composition follows the usual frame convention: `a * b` maps a point
/// expressed in frame b into the frame that `a` is expressed in.
struct Pose
{
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Quaterniond orientation = Eigen::Quaterniond::Identity();

  Pose() = default;
  Pose(const Eigen::Vector3d& p, const Eigen::Quaterniond& q) : position(p), orientation(q.normalized()) {}

  static Pose identity() { return {}; }
  static Pose translation(const Eigen::Vector3d& p) { return {p, Eigen::Quaterniond::Identity()}; }
  static Pose rotation(const Eigen::Quaterniond& q) { return {Eigen::Vector3d::Zero(), q}; }

  /// Fixed-axis roll/pitch/yaw, i.e. R = Rz(yaw) * Ry(pitch) * Rx(roll).
  static Pose from_xyz_rpy(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy);

  Pose operator*(const Pose& other) const;
  Eigen::Vector3d operator*(const Eigen::Vector3d& point) const { return position + orientation * point; }

  Pose inverse() const;
  Eigen::Matrix3d rotation_matrix() const { return orientation.toRotationMatrix(); }
  Eigen::Isometry3d isometry() const;

  bool is_finite() const;
};

/// Geodesic angle (rad) of the rotation taking `a` to `b`, in [0, pi].
double angular_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b);

/// Rotation vector (axis * angle) of `target * current^-1`, expressed in the common frame.
Eigen::Vector3d rotation_error(const Eigen::Quaterniond& current, const Eigen::Quaterniond& target);

/// Intrinsic X-Y-Z Euler rotation, R = Rx(a) * Ry(b) * Rz(c).
Eigen::Quaterniond intrinsic_xyz(const Eigen::Vector3d& angles);

}  // namespace graspforge
