#include "graspforge/geometry/primitives.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "graspforge/geometry/errors.hpp"

namespace graspforge
{

TriMesh make_box(const Eigen::Vector3d& dimensions)
{
  if (!(dimensions.array() > 0.0).all())
  {
    throw InvalidGeometryError("box dimensions must be positive");
  }
  const Eigen::Vector3d h = dimensions / 2.0;
  std::vector<Eigen::Vector3d> v;
  for (int i = 0; i < 8; ++i)
  {
    v.emplace_back((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(), (i & 4) ? h.z() : -h.z());
  }
  std::vector<Face> f = {
      {0, 2, 1}, {1, 2, 3},  // -z
      {4, 5, 6}, {5, 7, 6},  // +z
      {0, 1, 4}, {1, 5, 4},  // -y
      {2, 6, 3}, {3, 6, 7},  // +y
      {0, 4, 2}, {2, 4, 6},  // -x
      {1, 3, 5}, {3, 7, 5},  // +x
  };
  return TriMesh(std::move(v), std::move(f));
}

TriMesh make_cylinder(double radius, double height, int segments)
{
  if (!(radius > 0.0) || !(height > 0.0) || segments < 3)
  {
    throw InvalidGeometryError("cylinder needs positive radius/height and >= 3 segments");
  }
  std::vector<Eigen::Vector3d> v;
  std::vector<Face> f;
  const double hz = height / 2.0;
  for (int i = 0; i < segments; ++i)
  {
    const double a = 2.0 * std::numbers::pi * i / segments;
    v.emplace_back(radius * std::cos(a), radius * std::sin(a), -hz);
    v.emplace_back(radius * std::cos(a), radius * std::sin(a), hz);
  }
  const int bottom = static_cast<int>(v.size());
  v.emplace_back(0.0, 0.0, -hz);
  const int top = static_cast<int>(v.size());
  v.emplace_back(0.0, 0.0, hz);
  for (int i = 0; i < segments; ++i)
  {
    const int j = (i + 1) % segments;
    const int b0 = 2 * i, t0 = 2 * i + 1, b1 = 2 * j, t1 = 2 * j + 1;
    f.push_back({b0, b1, t1});
    f.push_back({b0, t1, t0});
    f.push_back({bottom, b1, b0});
    f.push_back({top, t0, t1});
  }
  return TriMesh(std::move(v), std::move(f));
}

TriMesh make_icosphere(double radius, int subdivisions)
{
  if (!(radius > 0.0) || subdivisions < 0)
  {
    throw InvalidGeometryError("icosphere needs a positive radius");
  }
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v = {
      {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
      {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
  };
  for (auto& p : v)
  {
    p.normalize();
  }
  std::vector<Face> f = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
      {11, 10, 2}, {10, 7, 6}, {7, 1, 8}, {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8},
      {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
  };

  for (int s = 0; s < subdivisions; ++s)
  {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end())
      {
        return it->second;
      }
      v.push_back((v[a] + v[b]).normalized());
      const int idx = static_cast<int>(v.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<Face> next;
    next.reserve(f.size() * 4);
    for (const Face& tri : f)
    {
      const int ab = mid(tri[0], tri[1]);
      const int bc = mid(tri[1], tri[2]);
      const int ca = mid(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    f = std::move(next);
  }
  for (auto& p : v)
  {
    p *= radius;
  }
  return TriMesh(std::move(v), std::move(f));
}

}  // namespace graspforge
