#include "graspforge/geometry/pose.hpp"

#include <algorithm>
#include <cmath>

namespace graspforge
{

Pose Pose::from_xyz_rpy(const Eigen::Vector3d& xyz, const Eigen::Vector3d& rpy)
{
  const Eigen::Quaterniond q = Eigen::AngleAxisd(rpy.z(), Eigen::Vector3d::UnitZ()) *
                               Eigen::AngleAxisd(rpy.y(), Eigen::Vector3d::UnitY()) *
                               Eigen::AngleAxisd(rpy.x(), Eigen::Vector3d::UnitX());
  return {xyz, q};
}

Pose Pose::operator*(const Pose& other) const
{
  Pose out;
  out.position = position + orientation * other.position;
  out.orientation = (orientation * other.orientation).normalized();
  return out;
}

Pose Pose::inverse() const
{
  Pose out;
  out.orientation = orientation.conjugate();
  out.position = -(out.orientation * position);
  return out;
}

Eigen::Isometry3d Pose::isometry() const
{
  Eigen::Isometry3d iso = Eigen::Isometry3d::Identity();
  iso.linear() = rotation_matrix();
  iso.translation() = position;
  return iso;
}

bool Pose::is_finite() const
{
  return position.allFinite() && orientation.coeffs().allFinite();
}

double angular_distance(const Eigen::Quaterniond& a, const Eigen::Quaterniond& b)
{
  // atan2 keeps full precision near zero where acos of the dot product does not
  const Eigen::Quaterniond d = a.normalized().conjugate() * b.normalized();
  return 2.0 * std::atan2(d.vec().norm(), std::abs(d.w()));
}

Eigen::Vector3d rotation_error(const Eigen::Quaterniond& current, const Eigen::Quaterniond& target)
{
  Eigen::Quaterniond delta = (target * current.conjugate()).normalized();
  if (delta.w() < 0.0)
  {
    delta.coeffs() *= -1.0;
  }
  const Eigen::Vector3d v = delta.vec();
  const double s = v.norm();
  if (s < 1e-12)
  {
    return 2.0 * v;
  }
  const double angle = 2.0 * std::atan2(s, delta.w());
  return v * (angle / s);
}

Eigen::Quaterniond intrinsic_xyz(const Eigen::Vector3d& angles)
{
  return Eigen::AngleAxisd(angles.x(), Eigen::Vector3d::UnitX()) *
         Eigen::AngleAxisd(angles.y(), Eigen::Vector3d::UnitY()) *
         Eigen::AngleAxisd(angles.z(), Eigen::Vector3d::UnitZ());
}

}  // namespace graspforge
