#include "graspforge/kinematics/ik.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>

#include "graspforge/random.hpp"

namespace graspforge
{
namespace
{

// A descent is abandoned once the error has not improved by this fraction
// over kStallWindow consecutive iterations.
constexpr int kStallWindow = 20;
constexpr double kStallImprovement = 1e-3;
constexpr double kMaxStep = 0.5;

// Revolute joints spanning a full turn wrap instead of saturating at a limit.
Eigen::VectorXd project(const KinematicChain& chain, Eigen::VectorXd q)
{
  for (int i = 0; i < chain.dof(); ++i)
  {
    const Joint& j = chain.joints()[i];
    if (j.type == JointType::revolute && j.upper - j.lower >= 2 * M_PI)
    {
      while (q(i) > j.upper)
      {
        q(i) -= 2 * M_PI;
      }
      while (q(i) < j.lower)
      {
        q(i) += 2 * M_PI;
      }
    }
  }
  return chain.clamp(q);
}

Eigen::Matrix<double, 6, 1> pose_error(const KinematicChain& chain, const Pose& target, const Eigen::VectorXd& q)
{
  const Pose current = chain.forward(q);
  Eigen::Matrix<double, 6, 1> err;
  err.head<3>() = target.position - current.position;
  err.tail<3>() = rotation_error(current.orientation, target.orientation);
  return err;
}

bool descend(const KinematicChain& chain, const Pose& target, Eigen::VectorXd& q, const IkOptions& opt)
{
  double lambda2 = opt.damping * opt.damping;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  Eigen::Matrix<double, 6, 1> err = pose_error(chain, target, q);
  for (int it = 0; it < opt.max_iterations; ++it)
  {
    if (err.head<3>().norm() <= opt.position_tolerance && err.tail<3>().norm() <= opt.rotation_tolerance)
    {
      return true;
    }
    const double total = err.norm();
    if (total < best * (1.0 - kStallImprovement))
    {
      best = total;
      since_best = 0;
    }
    else if (++since_best >= kStallWindow)
    {
      return false;
    }

    const Jacobian j = chain.jacobian(q);
    Eigen::Matrix<double, 6, 6> a = j * j.transpose();
    a.diagonal().array() += lambda2;
    Eigen::VectorXd dq = j.transpose() * a.ldlt().solve(err);
    const double largest = dq.cwiseAbs().maxCoeff();
    if (largest > kMaxStep)
    {
      dq *= kMaxStep / largest;
    }
    const Eigen::VectorXd next = project(chain, q + dq);
    const Eigen::Matrix<double, 6, 1> next_err = pose_error(chain, target, next);
    // Levenberg-style damping: relax after a good step, stiffen after a bad one
    if (next_err.norm() < total)
    {
      q = next;
      err = next_err;
      lambda2 = std::max(lambda2 * 0.5, 1e-6);
    }
    else
    {
      lambda2 = std::min(lambda2 * 4.0, 1e2);
    }
  }
  return err.head<3>().norm() <= opt.position_tolerance && err.tail<3>().norm() <= opt.rotation_tolerance;
}

}  // namespace

std::optional<Eigen::VectorXd> solve_ik(const KinematicChain& chain, const Pose& target, const Eigen::VectorXd& seed,
                                        const IkOptions& options)
{
  if (seed.size() != chain.dof())
  {
    throw KinematicsError("IK seed has " + std::to_string(seed.size()) + " values, chain has " +
                          std::to_string(chain.dof()) + " joints");
  }
  Rng rng(options.rng_seed);
  Eigen::VectorXd q = project(chain, seed);
  for (int attempt = 0; attempt <= options.max_restarts; ++attempt)
  {
    if (attempt > 0)
    {
      for (int i = 0; i < chain.dof(); ++i)
      {
        q(i) = rng.uniform(chain.lower()(i), chain.upper()(i));
      }
    }
    if (descend(chain, target, q, options))
    {
      return q;
    }
  }
  return std::nullopt;
}

std::optional<JointConfig> solve_ik(const KinematicChain& chain, const Pose& target, const JointConfig& seed,
                                    const IkOptions& options)
{
  auto q = solve_ik(chain, target, chain.positions(seed), options);
  if (!q)
  {
    return std::nullopt;
  }
  return chain.config(*q);
}

std::vector<Pose> tolerance_targets(const TolerancedStep& step, std::uint64_t seed)
{
  std::vector<Pose> targets{step.pose};
  const Eigen::Vector3d tp = step.tol_pos.cwiseMax(0.0);
  const Eigen::Vector3d tr = step.tol_rot.cwiseMax(0.0);

  if ((tp.array() > 0.0).any())
  {
    std::vector<Eigen::Vector3d> corners;
    for (int c = 0; c < 8; ++c)
    {
      const Eigen::Vector3d d((c & 1) ? tp.x() : -tp.x(), (c & 2) ? tp.y() : -tp.y(), (c & 4) ? tp.z() : -tp.z());
      if (std::find(corners.begin(), corners.end(), d) == corners.end())
      {
        corners.push_back(d);
      }
    }
    for (const auto& d : corners)
    {
      targets.push_back(step.pose * Pose::translation(d));
    }
  }

  if ((tp.array() > 0.0).any() || (tr.array() > 0.0).any())
  {
    Rng rng(seed);
    for (int s = 0; s < kToleranceRandomSamples; ++s)
    {
      Eigen::Vector3d dp, dr;
      for (int i = 0; i < 3; ++i)
      {
        dp(i) = rng.uniform(-tp(i), tp(i));
      }
      for (int i = 0; i < 3; ++i)
      {
        dr(i) = rng.uniform(-tr(i), tr(i));
      }
      targets.push_back(step.pose * Pose(dp, intrinsic_xyz(dr)));
    }
  }
  return targets;
}

std::optional<TolerancedSolution> solve_ik_toleranced(const KinematicChain& chain, const TolerancedStep& step,
                                                      const Pose& grasp_offset, const Eigen::VectorXd& seed,
                                                      const IkOptions& options)
{
  if ((step.tol_pos.array() < 0.0).any() || (step.tol_rot.array() < 0.0).any())
  {
    throw KinematicsError("step tolerances must be non-negative");
  }
  const auto targets = tolerance_targets(step, derive_seed(options.rng_seed, 0x7a11));
  for (std::size_t i = 0; i < targets.size(); ++i)
  {
    IkOptions attempt = options;
    attempt.rng_seed = derive_seed(options.rng_seed, i);
    if (auto q = solve_ik(chain, targets[i] * grasp_offset, seed, attempt))
    {
      return TolerancedSolution{*q, i == 0 ? StepStatus::exact : StepStatus::tolerance_only, targets[i]};
    }
  }
  return std::nullopt;
}

}  // namespace graspforge
