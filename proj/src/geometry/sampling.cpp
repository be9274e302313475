#include "graspforge/geometry/sampling.hpp"

#include <algorithm>
#include <cmath>

#include "graspforge/geometry/errors.hpp"
#include "graspforge/random.hpp"

namespace graspforge
{

std::vector<SurfaceSample> sample_surface(const TriMesh& mesh, std::size_t n, std::uint64_t seed)
{
  if (mesh.empty())
  {
    throw InvalidGeometryError("cannot sample an empty mesh");
  }
  if (n == 0)
  {
    throw InvalidGeometryError("sample count must be at least 1");
  }

  std::vector<double> cumulative(mesh.num_faces());
  double total = 0.0;
  for (std::size_t i = 0; i < mesh.num_faces(); ++i)
  {
    total += mesh.face_areas()[i];
    cumulative[i] = total;
  }

  Rng rng(seed);
  std::vector<SurfaceSample> samples;
  samples.reserve(n);
  for (std::size_t s = 0; s < n; ++s)
  {
    const double pick = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    const int face = static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(), mesh.num_faces() - 1));

    const double r1 = std::sqrt(rng.uniform());
    const double r2 = rng.uniform();
    const Eigen::Vector3d p = (1.0 - r1) * mesh.vertex(face, 0) + r1 * (1.0 - r2) * mesh.vertex(face, 1) +
                              r1 * r2 * mesh.vertex(face, 2);
    samples.push_back({p, mesh.face_normals()[face], face});
  }
  return samples;
}

}  // namespace graspforge
