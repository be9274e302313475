#include "graspforge/geometry/proximity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "graspforge/geometry/errors.hpp"

namespace graspforge
{

// Ericson, Real-Time Collision Detection, 5.1.5
Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& p, const Eigen::Vector3d& a,
                                          const Eigen::Vector3d& b, const Eigen::Vector3d& c)
{
  const Eigen::Vector3d ab = b - a;
  const Eigen::Vector3d ac = c - a;
  const Eigen::Vector3d ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0)
  {
    return a;
  }

  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3)
  {
    return b;
  }

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0)
  {
    return a + (d1 / (d1 - d3)) * ab;
  }

  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6)
  {
    return c;
  }

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0)
  {
    return a + (d2 / (d2 - d6)) * ac;
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
  {
    return b + ((d4 - d3) / ((d4 - d3) + (d5 - d6))) * (c - b);
  }

  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double segment_segment_closest(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1, const Eigen::Vector3d& q0,
                               const Eigen::Vector3d& q1, Eigen::Vector3d& on_p, Eigen::Vector3d& on_q)
{
  const Eigen::Vector3d d1 = p1 - p0;
  const Eigen::Vector3d d2 = q1 - q0;
  const Eigen::Vector3d r = p0 - q0;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);
  constexpr double tiny = 1e-20;
  double s = 0.0;
  double t = 0.0;

  if (a <= tiny && e <= tiny)
  {
    on_p = p0;
    on_q = q0;
    return (p0 - q0).norm();
  }
  if (a <= tiny)
  {
    t = std::clamp(f / e, 0.0, 1.0);
  }
  else
  {
    const double c = d1.dot(r);
    if (e <= tiny)
    {
      s = std::clamp(-c / a, 0.0, 1.0);
    }
    else
    {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      s = denom > tiny ? std::clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
      t = (b * s + f) / e;
      if (t < 0.0)
      {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      }
      else if (t > 1.0)
      {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  on_p = p0 + s * d1;
  on_q = q0 + t * d2;
  return (on_p - on_q).norm();
}

SegmentClosest segment_triangle_closest(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                                        const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                        const Eigen::Vector3d& c)
{
  SegmentClosest best;
  best.distance = std::numeric_limits<double>::infinity();

  // crossing test (Moller-Trumbore restricted to the segment)
  const Eigen::Vector3d dir = p1 - p0;
  const Eigen::Vector3d e1 = b - a;
  const Eigen::Vector3d e2 = c - a;
  const Eigen::Vector3d h = dir.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) > 1e-18)
  {
    const double inv = 1.0 / det;
    const Eigen::Vector3d s = p0 - a;
    const double u = inv * s.dot(h);
    const Eigen::Vector3d q = s.cross(e1);
    const double v = inv * dir.dot(q);
    const double t = inv * e2.dot(q);
    if (u >= 0.0 && v >= 0.0 && u + v <= 1.0 && t >= 0.0 && t <= 1.0)
    {
      best.segment_point = p0 + t * dir;
      best.mesh_point = best.segment_point;
      best.distance = 0.0;
      return best;
    }
  }

  for (const Eigen::Vector3d* end : {&p0, &p1})
  {
    const Eigen::Vector3d on_tri = closest_point_on_triangle(*end, a, b, c);
    const double d = (on_tri - *end).norm();
    if (d < best.distance)
    {
      best = {on_tri, *end, d, -1};
    }
  }

  const Eigen::Vector3d* corners[3] = {&a, &b, &c};
  for (int k = 0; k < 3; ++k)
  {
    Eigen::Vector3d on_seg, on_edge;
    const double d = segment_segment_closest(p0, p1, *corners[k], *corners[(k + 1) % 3], on_seg, on_edge);
    if (d < best.distance)
    {
      best = {on_edge, on_seg, d, -1};
    }
  }
  return best;
}

ClosestPoint closest_point(const TriMesh& mesh, const Eigen::Vector3d& query)
{
  if (mesh.empty())
  {
    throw InvalidGeometryError("closest_point on an empty mesh");
  }
  ClosestPoint best;
  best.distance = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mesh.num_faces(); ++i)
  {
    const Eigen::Vector3d p = closest_point_on_triangle(query, mesh.vertex(i, 0), mesh.vertex(i, 1), mesh.vertex(i, 2));
    const double d = (p - query).norm();
    if (d < best.distance)
    {
      best = {p, d, static_cast<int>(i)};
    }
  }
  return best;
}

MeshProximity::MeshProximity(const TriMesh& mesh) : mesh_(mesh)
{
  if (mesh_.empty())
  {
    throw InvalidGeometryError("proximity queries need a non-empty mesh");
  }
  order_.resize(mesh_.num_faces());
  for (std::size_t i = 0; i < order_.size(); ++i)
  {
    order_[i] = static_cast<int>(i);
  }
  nodes_.reserve(2 * order_.size());
  build(0, static_cast<int>(order_.size()));
}

int MeshProximity::build(int begin, int end)
{
  Node node;
  node.begin = begin;
  node.end = end;
  Eigen::AlignedBox3d centroid_box;
  for (int i = begin; i < end; ++i)
  {
    const int f = order_[i];
    for (int k = 0; k < 3; ++k)
    {
      node.box.extend(mesh_.vertex(f, k));
    }
    centroid_box.extend((mesh_.vertex(f, 0) + mesh_.vertex(f, 1) + mesh_.vertex(f, 2)) / 3.0);
  }
  const int index = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  if (end - begin <= 4)
  {
    return index;
  }

  int axis = 0;
  centroid_box.sizes().maxCoeff(&axis);
  const int mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int lhs, int rhs) {
    const double cl = mesh_.vertex(lhs, 0)(axis) + mesh_.vertex(lhs, 1)(axis) + mesh_.vertex(lhs, 2)(axis);
    const double cr = mesh_.vertex(rhs, 0)(axis) + mesh_.vertex(rhs, 1)(axis) + mesh_.vertex(rhs, 2)(axis);
    return cl < cr || (cl == cr && lhs < rhs);
  });
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

ClosestPoint MeshProximity::closest_point(const Eigen::Vector3d& query) const
{
  ClosestPoint best;
  best.distance = std::numeric_limits<double>::infinity();
  std::vector<int> stack{0};
  while (!stack.empty())
  {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (std::sqrt(node.box.squaredExteriorDistance(query)) >= best.distance)
    {
      continue;
    }
    if (node.left < 0)
    {
      for (int i = node.begin; i < node.end; ++i)
      {
        const int f = order_[i];
        const Eigen::Vector3d p =
            closest_point_on_triangle(query, mesh_.vertex(f, 0), mesh_.vertex(f, 1), mesh_.vertex(f, 2));
        const double d = (p - query).norm();
        if (d < best.distance || (d == best.distance && f < best.face_index))
        {
          best = {p, d, f};
        }
      }
      continue;
    }
    const double dl = nodes_[node.left].box.squaredExteriorDistance(query);
    const double dr = nodes_[node.right].box.squaredExteriorDistance(query);
    if (dl <= dr)
    {
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
    else
    {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return best;
}

SegmentClosest MeshProximity::closest_to_segment(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1) const
{
  const Eigen::Vector3d mid = 0.5 * (p0 + p1);
  const double half = 0.5 * (p1 - p0).norm();
  auto lower_bound = [&](const Node& n) { return std::sqrt(n.box.squaredExteriorDistance(mid)) - half; };

  SegmentClosest best;
  best.distance = std::numeric_limits<double>::infinity();
  std::vector<int> stack{0};
  while (!stack.empty())
  {
    const Node& node = nodes_[stack.back()];
    stack.pop_back();
    if (lower_bound(node) >= best.distance)
    {
      continue;
    }
    if (node.left < 0)
    {
      for (int i = node.begin; i < node.end; ++i)
      {
        const int f = order_[i];
        SegmentClosest c = segment_triangle_closest(p0, p1, mesh_.vertex(f, 0), mesh_.vertex(f, 1), mesh_.vertex(f, 2));
        if (c.distance < best.distance || (c.distance == best.distance && f < best.face_index))
        {
          c.face_index = f;
          best = c;
        }
      }
      continue;
    }
    const double dl = lower_bound(nodes_[node.left]);
    const double dr = lower_bound(nodes_[node.right]);
    if (dl <= dr)
    {
      stack.push_back(node.right);
      stack.push_back(node.left);
    }
    else
    {
      stack.push_back(node.left);
      stack.push_back(node.right);
    }
  }
  return best;
}

bool MeshProximity::contains(const Eigen::Vector3d& query) const
{
  // Van Oosterom-Strackee solid angle per triangle
  double total = 0.0;
  for (std::size_t f = 0; f < mesh_.num_faces(); ++f)
  {
    const Eigen::Vector3d a = mesh_.vertex(f, 0) - query;
    const Eigen::Vector3d b = mesh_.vertex(f, 1) - query;
    const Eigen::Vector3d c = mesh_.vertex(f, 2) - query;
    const double la = a.norm(), lb = b.norm(), lc = c.norm();
    const double num = a.dot(b.cross(c));
    const double den = la * lb * lc + a.dot(b) * lc + b.dot(c) * la + c.dot(a) * lb;
    total += 2.0 * std::atan2(num, den);
  }
  return total / (4.0 * std::numbers::pi) > 0.5;
}

}  // namespace graspforge
