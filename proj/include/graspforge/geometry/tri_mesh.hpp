#pragma once

#include <array>
#include <vector>

#include <Eigen/Core>

#include "graspforge/geometry/pose.hpp"

namespace graspforge
{

using Face = std::array<int, 3>;

/// Faces with area below this are dropped on construction.
inline constexpr double kMinFaceArea = 1e-12;

/// Immutable triangle mesh (meters). Face winding is counter-clockwise seen
/// from outside, so computed normals point outward.
class TriMesh
{
public:
  TriMesh() = default;

  /// Throws InvalidGeometryError on out-of-range indices or non-finite
  /// vertices. Degenerate faces are removed.
  TriMesh(std::vector<Eigen::Vector3d> vertices, std::vector<Face> faces);

  const std::vector<Eigen::Vector3d>& vertices() const { return vertices_; }
  const std::vector<Face>& faces() const { return faces_; }
  const std::vector<Eigen::Vector3d>& face_normals() const { return normals_; }
  const std::vector<double>& face_areas() const { return areas_; }

  bool empty() const { return faces_.empty(); }
  std::size_t num_faces() const { return faces_.size(); }

  const Eigen::Vector3d& vertex(int face, int corner) const { return vertices_[faces_[face][corner]]; }

  double surface_area() const;

  /// Signed enclosed volume; positive for closed, outward-wound meshes.
  double signed_volume() const;

  /// Volume centroid when the mesh encloses volume, area centroid otherwise.
  Eigen::Vector3d centroid() const;

  Eigen::AlignedBox3d bounds() const;

  TriMesh transformed(const Pose& pose) const;

  /// True when every undirected edge is shared by exactly two faces.
  bool is_watertight() const;

private:
  std::vector<Eigen::Vector3d> vertices_;
  std::vector<Face> faces_;
  std::vector<Eigen::Vector3d> normals_;
  std::vector<double> areas_;
};

}  // namespace graspforge
