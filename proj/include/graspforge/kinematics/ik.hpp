#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "graspforge/kinematics/chain.hpp"

namespace graspforge
{

struct IkOptions
{
  double position_tolerance = 1e-3;  // m
  double rotation_tolerance = 1e-2;  // rad, geodesic
  double damping = 0.1;
  int max_iterations = 200;
  int max_restarts = 10;
  std::uint64_t rng_seed = 0;
};

/// Damped least squares on the 6-D pose error with limit clamping; on failure
/// retries from up to `max_restarts` uniform-random configurations drawn
/// from `rng_seed`. Returns nullopt when the budget is exhausted.
std::optional<Eigen::VectorXd> solve_ik(const KinematicChain& chain, const Pose& target, const Eigen::VectorXd& seed,
                                        const IkOptions& options = {});

std::optional<JointConfig> solve_ik(const KinematicChain& chain, const Pose& target, const JointConfig& seed,
                                    const IkOptions& options = {});

/// Object pose with per-axis tolerances expressed in the object's own frame.
struct TolerancedStep
{
  Pose pose;
  Eigen::Vector3d tol_pos = Eigen::Vector3d::Zero();  // half-range, m
  Eigen::Vector3d tol_rot = Eigen::Vector3d::Zero();  // half-range Euler offsets, rad (intrinsic XYZ)
};

enum class StepStatus
{
  exact,
  tolerance_only
};

struct TolerancedSolution
{
  Eigen::VectorXd positions;
  StepStatus status = StepStatus::exact;
  Pose object_pose;  // the (possibly perturbed) object pose that was reached
};

inline constexpr int kToleranceRandomSamples = 16;

/// Object poses tried for a step, in order: the nominal pose, the distinct
/// corners of the position box at nominal rotation, then
/// kToleranceRandomSamples draws uniform over position box x rotation box.
std::vector<Pose> tolerance_targets(const TolerancedStep& step, std::uint64_t seed);

/// Reaches `object_pose * grasp_offset` with the chain tip for the first
/// workable entry of tolerance_targets(). `grasp_offset` is the chain tip
/// expressed in the object frame.
std::optional<TolerancedSolution> solve_ik_toleranced(const KinematicChain& chain, const TolerancedStep& step,
                                                      const Pose& grasp_offset, const Eigen::VectorXd& seed,
                                                      const IkOptions& options = {});

}  // namespace graspforge
