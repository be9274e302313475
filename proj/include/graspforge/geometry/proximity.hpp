#pragma once

#include <vector>

#include <Eigen/Geometry>

#include "graspforge/geometry/tri_mesh.hpp"

namespace graspforge
{

struct ClosestPoint
{
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
  double distance = 0.0;
  int face_index = -1;
};

struct SegmentClosest
{
  Eigen::Vector3d mesh_point = Eigen::Vector3d::Zero();
  Eigen::Vector3d segment_point = Eigen::Vector3d::Zero();
  double distance = 0.0;
  int face_index = -1;
};

Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b, const Eigen::Vector3d& c);

/// Closest pair between segment [p0, p1] and triangle (a, b, c).
SegmentClosest segment_triangle_closest(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                                        const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                        const Eigen::Vector3d& c);

/// Closest points between segments [p0, p1] and [q0, q1]; returns the distance.
double segment_segment_closest(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1, const Eigen::Vector3d& q0,
                               const Eigen::Vector3d& q1, Eigen::Vector3d& on_p, Eigen::Vector3d& on_q);

/// Exhaustive closest-point query. Throws InvalidGeometryError on an empty mesh.
ClosestPoint closest_point(const TriMesh& mesh, const Eigen::Vector3d& query);

/// Bounding-volume hierarchy over a mesh for repeated distance queries.
/// Holds its own copy of the triangles.
class MeshProximity
{
public:
  explicit MeshProximity(const TriMesh& mesh);

  ClosestPoint closest_point(const Eigen::Vector3d& query) const;
  SegmentClosest closest_to_segment(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1) const;

  /// Generalized winding number test; meaningful for closed meshes.
  bool contains(const Eigen::Vector3d& query) const;

  const TriMesh& mesh() const { return mesh_; }

private:
  struct Node
  {
    Eigen::AlignedBox3d box;
    int left = -1;
    int right = -1;
    int begin = 0;
    int end = 0;
  };

  int build(int begin, int end);

  TriMesh mesh_;
  std::vector<int> order_;
  std::vector<Node> nodes_;
};

}  // namespace graspforge
