#include "graspforge/geometry/convex_hull.hpp"

#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include <Eigen/QR>

namespace graspforge
{
namespace
{

struct WorkFacet
{
  std::vector<int> vertices;
  Eigen::VectorXd normal;
  double offset = 0.0;
  std::vector<int> outside;
  int farthest = -1;
  double farthest_distance = 0.0;
  bool alive = true;
};

struct RidgeHash
{
  std::size_t operator()(const std::vector<int>& ridge) const
  {
    std::uint64_t h = 1469598103934665603ULL;
    for (int v : ridge)
    {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL;
      h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h);
  }
};

class Quickhull
{
public:
  Quickhull(const std::vector<Eigen::VectorXd>& points, double relative_tolerance)
    : points_(points), dim_(points.empty() ? 0 : static_cast<int>(points.front().size()))
  {
    double scale = 0.0;
    for (const auto& p : points_)
    {
      scale = std::max(scale, p.cwiseAbs().maxCoeff());
    }
    eps_ = relative_tolerance * std::max(scale, 1e-300);
  }

  ConvexHull run()
  {
    ConvexHull hull;
    hull.dimension = dim_;
    if (dim_ < 2 || static_cast<int>(points_.size()) < dim_ + 1)
    {
      return hull;
    }
    std::vector<int> simplex;
    if (!initial_simplex(simplex))
    {
      return hull;
    }

    interior_ = Eigen::VectorXd::Zero(dim_);
    for (int idx : simplex)
    {
      interior_ += points_[idx];
    }
    interior_ /= static_cast<double>(simplex.size());

    std::vector<int> created;
    for (int skip = 0; skip <= dim_; ++skip)
    {
      std::vector<int> verts;
      for (int k = 0; k <= dim_; ++k)
      {
        if (k != skip)
        {
          verts.push_back(simplex[k]);
        }
      }
      created.push_back(add_facet(std::move(verts)));
    }

    std::vector<char> in_simplex(points_.size(), 0);
    for (int idx : simplex)
    {
      in_simplex[idx] = 1;
    }
    std::vector<int> pending;
    for (int i = 0; i < static_cast<int>(points_.size()); ++i)
    {
      if (!in_simplex[i])
      {
        pending.push_back(i);
      }
    }
    assign(pending, created);

    for (;;)
    {
      int source = -1;
      for (int f = 0; f < static_cast<int>(facets_.size()); ++f)
      {
        if (facets_[f].alive && facets_[f].farthest >= 0)
        {
          source = f;
          break;
        }
      }
      if (source < 0)
      {
        break;
      }
      expand(source);
    }

    hull.full_dimensional = true;
    for (auto& f : facets_)
    {
      if (f.alive)
      {
        hull.facets.push_back({std::move(f.vertices), std::move(f.normal), f.offset});
      }
    }
    return hull;
  }

private:
  bool initial_simplex(std::vector<int>& simplex) const
  {
    int first = 0;
    for (int i = 1; i < static_cast<int>(points_.size()); ++i)
    {
      if (points_[i](0) < points_[first](0))
      {
        first = i;
      }
    }
    simplex = {first};
    std::vector<Eigen::VectorXd> basis;
    for (int k = 0; k < dim_; ++k)
    {
      int best = -1;
      double best_norm = 0.0;
      for (int i = 0; i < static_cast<int>(points_.size()); ++i)
      {
        Eigen::VectorXd r = points_[i] - points_[first];
        for (const auto& b : basis)
        {
          r -= r.dot(b) * b;
        }
        const double nr = r.norm();
        if (nr > best_norm)
        {
          best_norm = nr;
          best = i;
        }
      }
      if (best < 0 || best_norm <= eps_ * 100.0)
      {
        return false;
      }
      Eigen::VectorXd r = points_[best] - points_[first];
      for (const auto& b : basis)
      {
        r -= r.dot(b) * b;
      }
      basis.push_back(r.normalized());
      simplex.push_back(best);
    }
    return true;
  }

  int add_facet(std::vector<int> verts)
  {
    WorkFacet f;
    Eigen::MatrixXd span(dim_, dim_ - 1);
    for (int i = 1; i < dim_; ++i)
    {
      span.col(i - 1) = points_[verts[i]] - points_[verts[0]];
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(span);
    f.normal = qr.householderQ() * Eigen::VectorXd::Unit(dim_, dim_ - 1);
    f.normal.normalize();
    f.offset = f.normal.dot(points_[verts[0]]);
    if (f.normal.dot(interior_) > f.offset)
    {
      f.normal = -f.normal;
      f.offset = -f.offset;
    }
    f.vertices = std::move(verts);
    facets_.push_back(std::move(f));
    return static_cast<int>(facets_.size()) - 1;
  }

  void assign(const std::vector<int>& candidates, const std::vector<int>& targets)
  {
    for (int p : candidates)
    {
      for (int t : targets)
      {
        WorkFacet& f = facets_[t];
        const double dist = f.normal.dot(points_[p]) - f.offset;
        if (dist > eps_)
        {
          f.outside.push_back(p);
          if (dist > f.farthest_distance)
          {
            f.farthest_distance = dist;
            f.farthest = p;
          }
          break;
        }
      }
    }
  }

  void expand(int source)
  {
    const int apex = facets_[source].farthest;
    const Eigen::VectorXd& p = points_[apex];

    std::vector<int> visible;
    for (int f = 0; f < static_cast<int>(facets_.size()); ++f)
    {
      if (facets_[f].alive && facets_[f].normal.dot(p) - facets_[f].offset > eps_)
      {
        visible.push_back(f);
      }
    }

    std::unordered_map<std::vector<int>, int, RidgeHash> ridge_count;
    for (int f : visible)
    {
      const auto& verts = facets_[f].vertices;
      for (int skip = 0; skip < dim_; ++skip)
      {
        std::vector<int> ridge;
        ridge.reserve(dim_ - 1);
        for (int k = 0; k < dim_; ++k)
        {
          if (k != skip)
          {
            ridge.push_back(verts[k]);
          }
        }
        std::sort(ridge.begin(), ridge.end());
        ++ridge_count[std::move(ridge)];
      }
    }

    std::vector<int> orphans;
    for (int f : visible)
    {
      facets_[f].alive = false;
      for (int q : facets_[f].outside)
      {
        if (q != apex)
        {
          orphans.push_back(q);
        }
      }
      facets_[f].outside.clear();
      facets_[f].farthest = -1;
    }

    // horizon ridges are shared with exactly one visible facet
    std::vector<std::vector<int>> horizon;
    for (const auto& [ridge, count] : ridge_count)
    {
      if (count == 1)
      {
        horizon.push_back(ridge);
      }
    }
    std::sort(horizon.begin(), horizon.end());

    std::vector<int> created;
    created.reserve(horizon.size());
    for (auto& ridge : horizon)
    {
      ridge.push_back(apex);
      created.push_back(add_facet(std::move(ridge)));
    }
    assign(orphans, created);
  }

  const std::vector<Eigen::VectorXd>& points_;
  int dim_;
  double eps_ = 0.0;
  Eigen::VectorXd interior_;
  std::vector<WorkFacet> facets_;
};

}  // namespace

ConvexHull compute_convex_hull(const std::vector<Eigen::VectorXd>& points, double relative_tolerance)
{
  return Quickhull(points, relative_tolerance).run();
}

}  // namespace graspforge
