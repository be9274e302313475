#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "graspforge/geometry/tri_mesh.hpp"

namespace graspforge
{

struct SurfaceSample
{
  Eigen::Vector3d point;
  Eigen::Vector3d normal;  // outward, unit
  int face_index = -1;
};

/// Area-weighted uniform samples over the mesh surface, deterministic in `seed`.
/// Throws InvalidGeometryError for an empty mesh or n == 0.
std::vector<SurfaceSample> sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed);

}  // namespace graspforge
