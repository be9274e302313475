#include "graspforge/planner/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "graspforge/geometry/convex_hull.hpp"

namespace graspforge
{

void ContactSet::validate() const
{
  if (points.empty())
  {
    throw std::invalid_argument("contact set is empty");
  }
  if (points.size() != normals.size())
  {
    throw std::invalid_argument("contact set has mismatched point and normal counts");
  }
  if (!(mu >= 0.0) || !std::isfinite(mu))
  {
    throw std::invalid_argument("friction coefficient must be non-negative");
  }
  for (std::size_t i = 0; i < normals.size(); ++i)
  {
    if (std::abs(normals[i].norm() - 1.0) > 1e-6 || !points[i].allFinite())
    {
      throw std::invalid_argument("contact " + std::to_string(i) + " has a non-unit normal or non-finite point");
    }
  }
}

ContactSet contact_set(const Grasp& grasp, const Eigen::Vector3d& com, double mu)
{
  ContactSet set;
  set.mu = mu;
  set.com = com;
  for (const auto& c : grasp.contacts)
  {
    set.points.push_back(c.point);
    set.normals.push_back(-c.normal.normalized());
  }
  return set;
}

std::vector<Eigen::Vector3d> friction_cone_edges(const Eigen::Vector3d& inward_normal, double mu, int m)
{
  const Eigen::Vector3d n = inward_normal.normalized();
  int axis = 0;
  n.cwiseAbs().minCoeff(&axis);
  const Eigen::Vector3d t1 = n.cross(Eigen::Vector3d::Unit(axis)).normalized();
  const Eigen::Vector3d t2 = n.cross(t1);
  std::vector<Eigen::Vector3d> edges;
  edges.reserve(m);
  for (int j = 0; j < m; ++j)
  {
    const double a = 2.0 * M_PI * j / m;
    edges.push_back((n + mu * (std::cos(a) * t1 + std::sin(a) * t2)).normalized());
  }
  return edges;
}

std::vector<Eigen::VectorXd> primitive_wrenches(const ContactSet& contacts, int m)
{
  double rho = 0.0;
  for (const auto& p : contacts.points)
  {
    rho = std::max(rho, (p - contacts.com).norm());
  }
  if (rho == 0.0)
  {
    rho = 1.0;
  }
  std::vector<Eigen::VectorXd> wrenches;
  wrenches.reserve(contacts.points.size() * m);
  for (std::size_t i = 0; i < contacts.points.size(); ++i)
  {
    const Eigen::Vector3d r = contacts.points[i] - contacts.com;
    for (const auto& f : friction_cone_edges(contacts.normals[i], contacts.mu, m))
    {
      Eigen::VectorXd w(6);
      w << f, r.cross(f) / rho;
      wrenches.push_back(std::move(w));
    }
  }
  return wrenches;
}

double force_closure_epsilon(const ContactSet& contacts, int m)
{
  if (m < 3)
  {
    throw std::invalid_argument("friction cones need at least 3 edges");
  }
  contacts.validate();
  const ConvexHull hull = compute_convex_hull(primitive_wrenches(contacts, m));
  if (!hull.full_dimensional || hull.facets.empty())
  {
    return 0.0;
  }
  // facets satisfy normal . x <= offset inside, so the origin is strictly
  // inside iff every offset is positive; the offset is then its distance
  double eps = std::numeric_limits<double>::infinity();
  for (const auto& f : hull.facets)
  {
    eps = std::min(eps, f.offset);
  }
  return eps > 1e-12 ? eps : 0.0;
}

double capability_term(const KinematicChain& chain, const Eigen::VectorXd& q, const Pose& tcp_in_tip,
                       const Pose& from, const Pose& to, double characteristic_length)
{
  const Eigen::Vector3d dp = to.position - from.position;
  const Eigen::Vector3d dw = rotation_error(from.orientation, to.orientation);

  const Pose tip = chain.forward(q);
  const Eigen::Vector3d r = (tip * tcp_in_tip).position - tip.position;
  const Jacobian j = chain.jacobian(q);
  Eigen::Matrix3d skew;
  skew << 0, -r.z(), r.y(), r.z(), 0, -r.x(), -r.y(), r.x(), 0;
  // TCP linear velocity = tip linear velocity + w x r
  const Eigen::MatrixXd jv = j.topRows<3>() - skew * j.bottomRows<3>();

  if (chain.dof() < 6)
  {
    if (dp.norm() < 1e-12)
    {
      return 0.0;
    }
    return ellipsoid_radius(jv, dp.normalized());
  }
  Eigen::VectorXd u(6);
  u << dp, characteristic_length * dw;
  if (u.norm() < 1e-12)
  {
    return 0.0;
  }
  Eigen::MatrixXd jt(6, chain.dof());
  jt << jv, characteristic_length * j.bottomRows<3>();
  return ellipsoid_radius(jt, u.normalized());
}

}  // namespace graspforge
