#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "graspforge/planner/generators.hpp"
#include "graspforge/planner/plugins.hpp"

namespace graspforge
{

struct ReachabilityParams
{
  IkOptions ik;

  static ReachabilityParams from_json(const nlohmann::json& j, const std::string& path);
};

/// A grasp survives when solve_ik_toleranced succeeds at every step. Step k
/// is seeded from step k-1's solution (step 0 from the task's start
/// configuration) and uses rng seed derive_seed(ctx.seed, index, k).
std::vector<GraspCandidate> filter_reachable(const std::vector<Grasp>& grasps, const TaskDescription& task,
                                             const Robot& robot, const ReachabilityParams& params,
                                             const StageContext& ctx);

struct CombinedParams
{
  double w_grasp = 0.5;
  double w_kinematics = 0.5;
  double mu = 0.5;
  int cone_edges = 8;

  static CombinedParams from_json(const nlohmann::json& j, const std::string& path);
};

/// w_g * eps / max eps + w_k * mean manipulability / max mean manipulability,
/// each normalized term 0 when its batch maximum is 0. eps is taken about the
/// object mesh centroid.
void evaluate_combined(std::vector<GraspCandidate>& candidates, const TaskDescription& task, const Robot& robot,
                       const CombinedParams& params, const StageContext& ctx);

struct CapabilityParams
{
  double characteristic_length = 0.2;  // m

  static CapabilityParams from_json(const nlohmann::json& j, const std::string& path);
};

/// Sum over consecutive steps of capability_term at the earlier step's
/// configuration; single-step tasks score by manipulability.
void evaluate_capability(std::vector<GraspCandidate>& candidates, const TaskDescription& task, const Robot& robot,
                         const CapabilityParams& params, const StageContext& ctx);

}  // namespace graspforge
