#include "graspforge/kinematics/chain.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <Eigen/Cholesky>
#include <Eigen/Geometry>
#include <Eigen/SVD>

namespace graspforge
{

Pose Joint::motion(double q) const
{
  if (type == JointType::prismatic)
  {
    return Pose::translation(axis * q);
  }
  return Pose::rotation(Eigen::Quaterniond(Eigen::AngleAxisd(q, axis)));
}

KinematicChain::KinematicChain(std::string base_frame, std::string tip_frame, std::vector<Joint> joints,
                               const Pose& tip_offset)
  : base_frame_(std::move(base_frame)), tip_frame_(std::move(tip_frame)), joints_(std::move(joints)),
    tip_offset_(tip_offset)
{
  if (!tip_offset_.is_finite())
  {
    throw KinematicsError("chain tip offset is not finite");
  }
  std::set<std::string> names;
  lower_.resize(dof());
  upper_.resize(dof());
  for (int i = 0; i < dof(); ++i)
  {
    Joint& j = joints_[i];
    if (!names.insert(j.name).second)
    {
      throw KinematicsError("duplicate joint name '" + j.name + "'");
    }
    const double n = j.axis.norm();
    if (!(n > 1e-12) || !j.axis.allFinite())
    {
      throw KinematicsError("joint '" + j.name + "' has a zero or non-finite axis");
    }
    j.axis /= n;
    if (!(j.lower <= j.upper))
    {
      throw KinematicsError("joint '" + j.name + "' has lower limit above upper limit");
    }
    if (!j.origin.is_finite())
    {
      throw KinematicsError("joint '" + j.name + "' has a non-finite origin");
    }
    lower_(i) = j.lower;
    upper_(i) = j.upper;
  }
}

Eigen::VectorXd KinematicChain::positions(const JointConfig& config) const
{
  Eigen::VectorXd q(dof());
  for (int i = 0; i < dof(); ++i)
  {
    auto it = config.find(joints_[i].name);
    if (it == config.end())
    {
      throw IncompleteConfigError(joints_[i].name);
    }
    q(i) = it->second;
  }
  return q;
}

JointConfig KinematicChain::config(const Eigen::VectorXd& q) const
{
  JointConfig out;
  for (int i = 0; i < dof(); ++i)
  {
    out[joints_[i].name] = q(i);
  }
  return out;
}

std::vector<Pose> KinematicChain::joint_frames(const Eigen::VectorXd& q) const
{
  std::vector<Pose> frames;
  frames.reserve(dof());
  Pose t;
  for (int i = 0; i < dof(); ++i)
  {
    t = t * joints_[i].origin * joints_[i].motion(q(i));
    frames.push_back(t);
  }
  return frames;
}

Pose KinematicChain::forward(const Eigen::VectorXd& q) const
{
  Pose t;
  for (int i = 0; i < dof(); ++i)
  {
    t = t * joints_[i].origin * joints_[i].motion(q(i));
  }
  return t * tip_offset_;
}

Jacobian KinematicChain::jacobian(const Eigen::VectorXd& q) const
{
  std::vector<Eigen::Vector3d> axes(dof());
  std::vector<Eigen::Vector3d> origins(dof());
  Pose t;
  for (int i = 0; i < dof(); ++i)
  {
    t = t * joints_[i].origin;
    axes[i] = t.orientation * joints_[i].axis;
    origins[i] = t.position;
    t = t * joints_[i].motion(q(i));
  }
  const Eigen::Vector3d tip = (t * tip_offset_).position;

  Jacobian j(6, dof());
  for (int i = 0; i < dof(); ++i)
  {
    if (joints_[i].type == JointType::prismatic)
    {
      j.col(i) << axes[i], Eigen::Vector3d::Zero();
    }
    else
    {
      j.col(i) << axes[i].cross(tip - origins[i]), axes[i];
    }
  }
  return j;
}

bool KinematicChain::within_limits(const Eigen::VectorXd& q, double slack) const
{
  return q.size() == dof() && (q.array() >= lower_.array() - slack).all() &&
         (q.array() <= upper_.array() + slack).all();
}

Eigen::VectorXd KinematicChain::clamp(const Eigen::VectorXd& q) const
{
  return q.cwiseMax(lower_).cwiseMin(upper_);
}

Pose forward_kinematics(const KinematicChain& chain, const JointConfig& q)
{
  return chain.forward(chain.positions(q));
}

Jacobian jacobian(const KinematicChain& chain, const JointConfig& q)
{
  return chain.jacobian(chain.positions(q));
}

double manipulability(const KinematicChain& chain, const Eigen::VectorXd& q)
{
  const Jacobian j = chain.jacobian(q);
  const Eigen::MatrixXd block = chain.dof() >= 6 ? Eigen::MatrixXd(j) : Eigen::MatrixXd(j.topRows<3>());
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(block).singularValues();
  double w = 1.0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
  {
    w *= sv(i);
  }
  return sv.size() == 0 ? 0.0 : std::max(w, 0.0);
}

double manipulability(const KinematicChain& chain, const JointConfig& q)
{
  return manipulability(chain, chain.positions(q));
}

double ellipsoid_radius(const Eigen::MatrixXd& task_jacobian, const Eigen::VectorXd& direction)
{
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(task_jacobian, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0.0)
  {
    return 0.0;
  }
  // components of the direction along the ellipsoid's principal axes; any
  // remainder lies in a collapsed direction
  double quad = 0.0;
  Eigen::VectorXd residual = direction;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
  {
    if (sv(i) <= 1e-12 * sv(0))
    {
      break;
    }
    const double c = svd.matrixU().col(i).dot(direction);
    residual -= c * svd.matrixU().col(i);
    quad += c * c / (sv(i) * sv(i));
  }
  if (residual.norm() > 1e-9 * std::max(1.0, direction.norm()) || !(quad > 0.0))
  {
    return 0.0;
  }
  return 1.0 / std::sqrt(quad);
}

}  // namespace graspforge
