#include "graspforge/geometry/point_cloud.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>

#include "graspforge/geometry/convex_hull.hpp"
#include "graspforge/geometry/errors.hpp"

namespace graspforge
{

PointCloud::PointCloud(std::vector<Eigen::Vector3d> points, std::string frame)
  : points_(std::move(points)), frame_(std::move(frame))
{
  for (std::size_t i = 0; i < points_.size(); ++i)
  {
    if (!points_[i].allFinite())
    {
      throw InvalidGeometryError("point " + std::to_string(i) + " has non-finite coordinates");
    }
  }
}

void RoiBox::validate() const
{
  if (!center.is_finite())
  {
    throw InvalidGeometryError("ROI box pose is not finite");
  }
  for (int i = 0; i < 3; ++i)
  {
    if (!(half_extents(i) > 0.0) || !std::isfinite(half_extents(i)))
    {
      throw InvalidGeometryError("ROI box half-extents must be positive");
    }
  }
}

bool RoiBox::contains(const Eigen::Vector3d& point) const
{
  const Eigen::Vector3d local = center.orientation.conjugate() * (point - center.position);
  return (local.cwiseAbs().array() <= half_extents.array()).all();
}

PointCloud crop_cloud(const PointCloud& cloud, const RoiBox& box)
{
  std::vector<Eigen::Vector3d> kept;
  for (const auto& p : cloud.points())
  {
    if (box.contains(p))
    {
      kept.push_back(p);
    }
  }
  return PointCloud(std::move(kept), cloud.frame());
}

TriMesh reconstruct_mesh(const PointCloud& cloud)
{
  const std::size_t n = cloud.size();
  if (n < 4)
  {
    throw ReconstructionError("mesh reconstruction needs at least 4 points, got " + std::to_string(n), n);
  }

  std::vector<Eigen::VectorXd> pts;
  pts.reserve(n);
  for (const auto& p : cloud.points())
  {
    pts.emplace_back(p);
  }
  const ConvexHull hull = compute_convex_hull(pts);
  if (!hull.full_dimensional)
  {
    throw ReconstructionError("points are coplanar or collinear; cannot enclose a volume", n);
  }

  // keep only referenced vertices, in first-use order
  std::vector<int> remap(n, -1);
  std::vector<Eigen::Vector3d> vertices;
  std::vector<Face> faces;
  faces.reserve(hull.facets.size());
  for (const auto& facet : hull.facets)
  {
    Face f{};
    for (int k = 0; k < 3; ++k)
    {
      const int src = facet.vertices[k];
      if (remap[src] < 0)
      {
        remap[src] = static_cast<int>(vertices.size());
        vertices.push_back(cloud.points()[src]);
      }
      f[k] = remap[src];
    }
    const Eigen::Vector3d cross = (vertices[f[1]] - vertices[f[0]]).cross(vertices[f[2]] - vertices[f[0]]);
    if (cross.dot(facet.normal.head<3>()) < 0.0)
    {
      std::swap(f[1], f[2]);
    }
    faces.push_back(f);
  }
  return TriMesh(std::move(vertices), std::move(faces));
}

PointCloud parse_cloud_text(std::istream& in, std::size_t max_points)
{
  std::vector<Eigen::Vector3d> points;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line))
  {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#')
    {
      continue;
    }
    std::istringstream fields(line);
    Eigen::Vector3d p;
    std::string extra;
    if (!(fields >> p.x() >> p.y() >> p.z()) || (fields >> extra))
    {
      throw InvalidGeometryError("cloud line " + std::to_string(line_no) + ": expected three numbers");
    }
    if (!p.allFinite())
    {
      throw InvalidGeometryError("cloud line " + std::to_string(line_no) + ": non-finite coordinate");
    }
    if (points.size() >= max_points)
    {
      throw CloudTooLargeError("cloud exceeds " + std::to_string(max_points) + " points");
    }
    points.push_back(p);
  }
  return PointCloud(std::move(points));
}

PointCloud parse_cloud_text(const std::string& text, std::size_t max_points)
{
  std::istringstream in(text);
  return parse_cloud_text(in, max_points);
}

PointCloud load_cloud(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw MeshIoError("cannot open cloud file '" + path + "'");
  }
  return parse_cloud_text(in);
}

}  // namespace graspforge
