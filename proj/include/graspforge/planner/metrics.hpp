#pragma once

#include <vector>

#include <Eigen/Core>

#include "graspforge/task/task.hpp"

namespace graspforge
{

/// Point contacts with Coulomb friction about a reference point.
struct ContactSet
{
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normals;  // inward (into the object), unit
  double mu = 0.5;
  Eigen::Vector3d com = Eigen::Vector3d::Zero();

  /// Throws std::invalid_argument for an empty set, mismatched sizes,
  /// non-unit normals or negative mu.
  void validate() const;
};

/// Contacts of a grasp (outward normals are flipped inward).
ContactSet contact_set(const Grasp& grasp, const Eigen::Vector3d& com, double mu);

/// `m` unit force directions on the boundary of the friction cone about
/// `inward_normal`. Tangent t1 = normalize(n x e) with e the coordinate axis
/// least aligned with n (lowest index on ties), t2 = n x t1, and edge j is
/// normalize(n + mu (cos(2 pi j / m) t1 + sin(2 pi j / m) t2)).
std::vector<Eigen::Vector3d> friction_cone_edges(const Eigen::Vector3d& inward_normal, double mu, int m);

/// (f, (p - com) x f / rho) for every cone edge of every contact, with
/// rho = max |p - com| (1 when all contacts sit on com).
std::vector<Eigen::VectorXd> primitive_wrenches(const ContactSet& contacts, int m);

/// Radius of the largest origin-centred ball inside the convex hull of the
/// primitive wrenches; 0 when the hull is not 6-D or the origin is not
/// strictly inside. Throws std::invalid_argument for m < 3 or invalid contacts.
double force_closure_epsilon(const ContactSet& contacts, int m = 8);

/// Capability term for one step pair: ellipsoid radius of the weighted TCP
/// Jacobian along the normalized twist from `from` to `to`. Chains with
/// fewer than 6 joints use the linear part only. Zero when from == to.
double capability_term(const KinematicChain& chain, const Eigen::VectorXd& q, const Pose& tcp_in_tip,
                       const Pose& from, const Pose& to, double characteristic_length);

}  // namespace graspforge
