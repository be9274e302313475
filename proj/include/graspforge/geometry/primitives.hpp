#pragma once

#include <Eigen/Core>

#include "graspforge/geometry/tri_mesh.hpp"

namespace graspforge
{

// All primitives are centered on the origin; cylinders run along z.

TriMesh make_box(const Eigen::Vector3d& dimensions);
TriMesh make_cylinder(double radius, double height, int segments = 32);
TriMesh make_icosphere(double radius, int subdivisions = 2);

}  // namespace graspforge
