#pragma once

#include <vector>

#include <Eigen/Core>

namespace graspforge
{

/// Simplicial facet of a hull: `normal . x = offset` with `normal` unit and
/// pointing away from the hull interior.
struct HullFacet
{
  std::vector<int> vertices;
  Eigen::VectorXd normal;
  double offset = 0.0;
};

struct ConvexHull
{
  int dimension = 0;
  /// False when the points span less than `dimension` dimensions; `facets` is then empty.
  bool full_dimensional = false;
  std::vector<HullFacet> facets;
};

/// Quickhull in arbitrary dimension. Points within `relative_tolerance`
/// times the point-set scale of a facet plane count as lying on it.
ConvexHull compute_convex_hull(const std::vector<Eigen::VectorXd>& points, double relative_tolerance = 1e-10);

}  // namespace graspforge
