#pragma once

#include <istream>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "graspforge/geometry/pose.hpp"
#include "graspforge/geometry/tri_mesh.hpp"

namespace graspforge
{

/// Points (meters) in a named frame. Non-finite coordinates are rejected.
class PointCloud
{
public:
  PointCloud() = default;
  explicit PointCloud(std::vector<Eigen::Vector3d> points, std::string frame = "world");

  const std::vector<Eigen::Vector3d>& points() const { return points_; }
  const std::string& frame() const { return frame_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;

private:
  std::vector<Eigen::Vector3d> points_;
  std::string frame_ = "world";
};

/// Oriented region-of-interest box.
struct RoiBox
{
  Pose center;
  Eigen::Vector3d half_extents = Eigen::Vector3d::Ones();

  /// Throws InvalidGeometryError unless all half-extents are positive and finite.
  void validate() const;
  bool contains(const Eigen::Vector3d& point) const;
};

/// Keeps the points inside `box` (boundary inclusive), preserving order.
PointCloud crop_cloud(const PointCloud& cloud, const RoiBox& box);

/// Convex hull of the cloud as a closed, outward-wound mesh.
/// Throws ReconstructionError for fewer than 4 points or flat input.
TriMesh reconstruct_mesh(const PointCloud& cloud);

/// ASCII "x y z" per line, '#' comments, blank lines ignored.
/// `max_points` guards request bodies; exceeding it throws CloudTooLargeError.
PointCloud parse_cloud_text(std::istream& in, std::size_t max_points = 5'000'000);
PointCloud parse_cloud_text(const std::string& text, std::size_t max_points = 5'000'000);
PointCloud load_cloud(const std::string& path);

}  // namespace graspforge
