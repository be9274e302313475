#include "graspforge/geometry/tri_mesh.hpp"

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "graspforge/geometry/errors.hpp"

namespace graspforge
{

TriMesh::TriMesh(std::vector<Eigen::Vector3d> vertices, std::vector<Face> faces) : vertices_(std::move(vertices))
{
  const int n = static_cast<int>(vertices_.size());
  for (const auto& v : vertices_)
  {
    if (!v.allFinite())
    {
      throw InvalidGeometryError("mesh vertex has non-finite coordinates");
    }
  }

  faces_.reserve(faces.size());
  normals_.reserve(faces.size());
  areas_.reserve(faces.size());
  for (const Face& f : faces)
  {
    for (int idx : f)
    {
      if (idx < 0 || idx >= n)
      {
        throw InvalidGeometryError("face index " + std::to_string(idx) + " out of range for " + std::to_string(n) +
                                   " vertices");
      }
    }
    const Eigen::Vector3d cross =
        (vertices_[f[1]] - vertices_[f[0]]).cross(vertices_[f[2]] - vertices_[f[0]]);
    const double area = 0.5 * cross.norm();
    if (!(area >= kMinFaceArea))
    {
      continue;
    }
    faces_.push_back(f);
    normals_.push_back(cross.normalized());
    areas_.push_back(area);
  }
}

double TriMesh::surface_area() const
{
  double total = 0.0;
  for (double a : areas_)
  {
    total += a;
  }
  return total;
}

double TriMesh::signed_volume() const
{
  double six_v = 0.0;
  for (std::size_t i = 0; i < faces_.size(); ++i)
  {
    six_v += vertex(i, 0).dot(vertex(i, 1).cross(vertex(i, 2)));
  }
  return six_v / 6.0;
}

Eigen::Vector3d TriMesh::centroid() const
{
  double six_v = 0.0;
  Eigen::Vector3d moment = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < faces_.size(); ++i)
  {
    const double d = vertex(i, 0).dot(vertex(i, 1).cross(vertex(i, 2)));
    six_v += d;
    moment += d * (vertex(i, 0) + vertex(i, 1) + vertex(i, 2)) / 4.0;
  }
  if (std::abs(six_v) > 1e-15)
  {
    return moment / six_v;
  }

  // open surface
  Eigen::Vector3d weighted = Eigen::Vector3d::Zero();
  double area = 0.0;
  for (std::size_t i = 0; i < faces_.size(); ++i)
  {
    weighted += areas_[i] * (vertex(i, 0) + vertex(i, 1) + vertex(i, 2)) / 3.0;
    area += areas_[i];
  }
  return area > 0.0 ? Eigen::Vector3d(weighted / area) : Eigen::Vector3d::Zero();
}

Eigen::AlignedBox3d TriMesh::bounds() const
{
  Eigen::AlignedBox3d box;
  for (const auto& f : faces_)
  {
    for (int idx : f)
    {
      box.extend(vertices_[idx]);
    }
  }
  return box;
}

TriMesh TriMesh::transformed(const Pose& pose) const
{
  std::vector<Eigen::Vector3d> moved;
  moved.reserve(vertices_.size());
  for (const auto& v : vertices_)
  {
    moved.push_back(pose * v);
  }
  return TriMesh(std::move(moved), faces_);
}

bool TriMesh::is_watertight() const
{
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& f : faces_)
  {
    for (int k = 0; k < 3; ++k)
    {
      int a = f[k];
      int b = f[(k + 1) % 3];
      if (a > b)
      {
        std::swap(a, b);
      }
      ++edge_count[{a, b}];
    }
  }
  for (const auto& [edge, count] : edge_count)
  {
    if (count != 2)
    {
      return false;
    }
  }
  return !faces_.empty();
}

}  // namespace graspforge
