#pragma once

#include <cstdint>
#include <vector>

#include "graspforge/geometry/tri_mesh.hpp"
#include "graspforge/kinematics/end_effector.hpp"
#include "graspforge/planner/plugins.hpp"
#include "graspforge/task/task.hpp"

namespace graspforge
{

struct SurfaceGeneratorParams
{
  int n_samples = 200;
  int roll_count = 8;
  double standoff = 0.005;   // m, retreat after first contact
  double step_size = 0.001;  // m, prismatic finger closing step; revolute uses step_size * 10 rad

  /// Throws SchemaError (under `path`) for non-positive values.
  static SurfaceGeneratorParams from_json(const nlohmann::json& j, const std::string& path);
  nlohmann::json to_json() const;
};

struct AntipodalGeneratorParams
{
  int n_pairs = 200;  // surface points tried as the first contact
  double mu = 0.5;
  int approach_count = 4;  // approach directions tried about the closing axis

  static AntipodalGeneratorParams from_json(const nlohmann::json& j, const std::string& path);
  nlohmann::json to_json() const;
};

/// Approaches every surface sample against its outward normal at
/// `roll_count` rolls, closes the fingers, and keeps grasps where at least two
/// finger links touch with at least one opposing pair of contact normals.
/// Output depends only on the object-frame mesh, the hand and the seed.
std::vector<Grasp> generate_surface_grasps(const TriMesh& object, const EndEffectorModel& ee,
                                           const SurfaceGeneratorParams& params, std::uint64_t seed, int jobs = 1);

/// Throws std::invalid_argument unless the hand has exactly two single-joint
/// prismatic fingers.
std::vector<Grasp> generate_antipodal_grasps(const TriMesh& object, const EndEffectorModel& ee,
                                             const AntipodalGeneratorParams& params, std::uint64_t seed,
                                             int jobs = 1);

/// True when the direction from `from` to `to` lies within the friction cone
/// about the inward normal at `from` (angle <= atan(mu), with 1e-6 rad slack).
bool inside_friction_cone(const Eigen::Vector3d& from, const Eigen::Vector3d& outward_normal,
                          const Eigen::Vector3d& to, double mu);

/// Right-handed frame whose z axis is `approach` and whose x axis is a
/// deterministic perpendicular, rolled by `roll` about z.
Eigen::Quaterniond approach_frame(const Eigen::Vector3d& approach, double roll);

}  // namespace graspforge
