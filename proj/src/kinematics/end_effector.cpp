#include "graspforge/kinematics/end_effector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace graspforge
{
namespace
{

constexpr int kLinkContactSamples = 7;

Capsule to_world(const Pose& frame, const Capsule& c)
{
  return {frame * c.p0, frame * c.p1, c.radius};
}

struct LinkClearance
{
  double clearance = std::numeric_limits<double>::infinity();
  int link = -1;
};

/// Minimum clearance over links [from, end) of one finger.
LinkClearance finger_clearance(const Finger& finger, const Pose& palm_pose, const std::vector<double>& q,
                               const MeshProximity& object, int from, bool check_inside)
{
  LinkClearance out;
  Pose t = palm_pose;
  for (int j = 0; j < static_cast<int>(finger.joints.size()); ++j)
  {
    t = t * finger.joints[j].origin * finger.joints[j].motion(q[j]);
    if (j < from)
    {
      continue;
    }
    const double c = capsule_clearance(object, to_world(t, finger.links[j]), check_inside);
    if (c < out.clearance)
    {
      out = {c, j};
    }
  }
  return out;
}

// Separation direction is well defined at edges and vertices, unlike the face normal.
Eigen::Vector3d contact_normal(const MeshProximity& object, const Eigen::Vector3d& on_mesh,
                               const Eigen::Vector3d& on_link, int face)
{
  const Eigen::Vector3d d = on_link - on_mesh;
  if (d.norm() > 1e-7)
  {
    return d.normalized();
  }
  return object.mesh().face_normals()[face];
}

}  // namespace

void EndEffectorModel::validate() const
{
  if (fingers.empty())
  {
    throw KinematicsError("end effector '" + name + "' has no fingers");
  }
  if (!tcp_offset.is_finite() || !mount.is_finite())
  {
    throw KinematicsError("end effector '" + name + "' has a non-finite TCP offset or mount");
  }
  std::set<std::string> names;
  for (std::size_t f = 0; f < fingers.size(); ++f)
  {
    const Finger& finger = fingers[f];
    const std::size_t n = finger.joints.size();
    if (n == 0 || finger.open.size() != n || finger.closed.size() != n || finger.links.size() != n)
    {
      throw KinematicsError("end effector '" + name + "' finger " + std::to_string(f) +
                            ": joints, open, closed and links must have equal non-zero length");
    }
    for (std::size_t j = 0; j < n; ++j)
    {
      const Joint& joint = finger.joints[j];
      if (!names.insert(joint.name).second)
      {
        throw KinematicsError("end effector '" + name + "' repeats finger joint '" + joint.name + "'");
      }
      for (double v : {finger.open[j], finger.closed[j]})
      {
        if (v < joint.lower - 1e-12 || v > joint.upper + 1e-12)
        {
          throw KinematicsError("finger joint '" + joint.name + "' open/closed value outside its limits");
        }
      }
      if (!(finger.links[j].radius >= 0.0))
      {
        throw KinematicsError("finger joint '" + joint.name + "' link has a negative radius");
      }
    }
  }
}

std::vector<std::string> EndEffectorModel::finger_joint_names() const
{
  std::vector<std::string> out;
  for (const auto& finger : fingers)
  {
    for (const auto& j : finger.joints)
    {
      out.push_back(j.name);
    }
  }
  return out;
}

JointConfig EndEffectorModel::open_config() const
{
  JointConfig c;
  for (const auto& finger : fingers)
  {
    for (std::size_t j = 0; j < finger.joints.size(); ++j)
    {
      c[finger.joints[j].name] = finger.open[j];
    }
  }
  return c;
}

JointConfig EndEffectorModel::closed_config() const
{
  JointConfig c;
  for (const auto& finger : fingers)
  {
    for (std::size_t j = 0; j < finger.joints.size(); ++j)
    {
      c[finger.joints[j].name] = finger.closed[j];
    }
  }
  return c;
}

bool EndEffectorModel::within_finger_limits(const JointConfig& config, double slack) const
{
  for (const auto& finger : fingers)
  {
    for (const auto& j : finger.joints)
    {
      auto it = config.find(j.name);
      if (it == config.end() || it->second < j.lower - slack || it->second > j.upper + slack)
      {
        return false;
      }
    }
  }
  return true;
}

std::vector<std::vector<Pose>> EndEffectorModel::link_frames(const Pose& palm_pose, const JointConfig& config) const
{
  std::vector<std::vector<Pose>> frames;
  for (const auto& finger : fingers)
  {
    std::vector<Pose> chain;
    Pose t = palm_pose;
    for (const auto& j : finger.joints)
    {
      auto it = config.find(j.name);
      if (it == config.end())
      {
        throw IncompleteConfigError(j.name);
      }
      t = t * j.origin * j.motion(it->second);
      chain.push_back(t);
    }
    frames.push_back(std::move(chain));
  }
  return frames;
}

double EndEffectorModel::reach_radius() const
{
  double r = 0.0;
  for (const auto& c : palm)
  {
    r = std::max({r, c.p0.norm() + c.radius, c.p1.norm() + c.radius});
  }
  const auto frames = link_frames(Pose::identity(), open_config());
  for (std::size_t f = 0; f < fingers.size(); ++f)
  {
    for (std::size_t k = 0; k < fingers[f].links.size(); ++k)
    {
      const Capsule w = to_world(frames[f][k], fingers[f].links[k]);
      r = std::max({r, w.p0.norm() + w.radius, w.p1.norm() + w.radius});
    }
  }
  return r;
}

double EndEffectorModel::max_opening() const
{
  if (fingers.size() != 2)
  {
    return 0.0;
  }
  const auto frames = link_frames(Pose::identity(), open_config());
  const Capsule a = to_world(frames[0].back(), fingers[0].links.back());
  const Capsule b = to_world(frames[1].back(), fingers[1].links.back());
  Eigen::Vector3d pa, pb;
  return segment_segment_closest(a.p0, a.p1, b.p0, b.p1, pa, pb) - a.radius - b.radius;
}

int FingerClosure::touching_links() const
{
  std::set<std::pair<int, int>> links;
  for (const auto& c : contacts)
  {
    links.emplace(c.finger, c.link);
  }
  return static_cast<int>(links.size());
}

double capsule_clearance(const MeshProximity& object, const Capsule& capsule, bool check_inside)
{
  const SegmentClosest c = object.closest_to_segment(capsule.p0, capsule.p1);
  if (check_inside &&
      (object.contains(capsule.p0) || object.contains(capsule.p1) || object.contains(0.5 * (capsule.p0 + capsule.p1))))
  {
    return -(c.distance + capsule.radius);
  }
  return c.distance - capsule.radius;
}

double palm_clearance(const EndEffectorModel& ee, const Pose& palm_pose, const MeshProximity& object)
{
  double out = std::numeric_limits<double>::infinity();
  for (const auto& c : ee.palm)
  {
    out = std::min(out, capsule_clearance(object, to_world(palm_pose, c), true));
  }
  return out;
}

FingerClosure close_fingers(const EndEffectorModel& ee, const Pose& palm_pose, const MeshProximity& object,
                            const ClosingOptions& options)
{
  const double eps = options.contact_epsilon;
  if (palm_clearance(ee, palm_pose, object) < -eps)
  {
    throw PenetrationError("palm of '" + ee.name + "' penetrates the object at the open configuration");
  }

  const std::size_t nf = ee.fingers.size();
  std::vector<std::vector<double>> q(nf);
  std::vector<std::vector<char>> frozen(nf);
  auto freeze_through = [&](std::size_t f, int link) {
    for (int j = 0; j <= link; ++j)
    {
      frozen[f][j] = 1;
    }
  };

  for (std::size_t f = 0; f < nf; ++f)
  {
    const Finger& finger = ee.fingers[f];
    q[f] = finger.open;
    frozen[f].assign(finger.joints.size(), 0);
    Pose t = palm_pose;
    for (std::size_t k = 0; k < finger.joints.size(); ++k)
    {
      t = t * finger.joints[k].origin * finger.joints[k].motion(q[f][k]);
      const double c = capsule_clearance(object, to_world(t, finger.links[k]), true);
      if (c < -eps)
      {
        throw PenetrationError("finger " + std::to_string(f) + " of '" + ee.name +
                               "' starts inside the object");
      }
      if (c <= eps)
      {
        freeze_through(f, static_cast<int>(k));
      }
    }
  }

  bool moving = true;
  while (moving)
  {
    moving = false;
    for (std::size_t f = 0; f < nf; ++f)
    {
      const Finger& finger = ee.fingers[f];
      for (std::size_t j = 0; j < finger.joints.size(); ++j)
      {
        if (frozen[f][j])
        {
          continue;
        }
        const double cur = q[f][j];
        const double remaining = finger.closed[j] - cur;
        if (remaining == 0.0)
        {
          frozen[f][j] = 1;
          continue;
        }
        moving = true;
        const double step =
            finger.joints[j].type == JointType::revolute ? options.revolute_step : options.prismatic_step;
        const double next = std::abs(remaining) <= step ? finger.closed[j] : cur + std::copysign(step, remaining);

        std::vector<double> trial = q[f];
        trial[j] = next;
        const LinkClearance c = finger_clearance(finger, palm_pose, trial, object, static_cast<int>(j), false);
        if (c.clearance > eps)
        {
          q[f][j] = next;
          if (next == finger.closed[j])
          {
            frozen[f][j] = 1;
          }
          continue;
        }

        double lo = cur;
        double hi = next;
        int contact_link = c.link;
        for (int it = 0; it < 60; ++it)
        {
          const double mid = 0.5 * (lo + hi);
          trial[j] = mid;
          const LinkClearance m = finger_clearance(finger, palm_pose, trial, object, static_cast<int>(j), false);
          if (m.clearance > eps)
          {
            lo = mid;
          }
          else if (m.clearance < 0.0)
          {
            // stop touching, never inside: the accepted band is [0, eps]
            hi = mid;
            contact_link = m.link;
          }
          else
          {
            lo = mid;
            contact_link = m.link;
            break;
          }
        }
        q[f][j] = lo;
        freeze_through(f, contact_link);
      }
    }
  }

  FingerClosure out;
  for (std::size_t f = 0; f < nf; ++f)
  {
    const Finger& finger = ee.fingers[f];
    Pose t = palm_pose;
    for (std::size_t k = 0; k < finger.joints.size(); ++k)
    {
      out.finger_config[finger.joints[k].name] = q[f][k];
      t = t * finger.joints[k].origin * finger.joints[k].motion(q[f][k]);
      const Capsule w = to_world(t, finger.links[k]);
      const SegmentClosest sc = object.closest_to_segment(w.p0, w.p1);
      if (sc.distance - w.radius > eps)
      {
        continue;
      }
      std::vector<Contact> link_contacts{
          {sc.mesh_point, contact_normal(object, sc.mesh_point, sc.segment_point, sc.face_index),
           static_cast<int>(f), static_cast<int>(k)}};
      // a link lying along a face touches over a patch; sample along it
      for (int s = 0; s < kLinkContactSamples; ++s)
      {
        const Eigen::Vector3d x = w.p0 + (w.p1 - w.p0) * (double(s) / (kLinkContactSamples - 1));
        const ClosestPoint cp = object.closest_point(x);
        if (cp.distance - w.radius > eps)
        {
          continue;
        }
        const bool distinct = std::all_of(link_contacts.begin(), link_contacts.end(),
                                          [&](const Contact& c) { return (c.point - cp.point).norm() > 1e-3; });
        if (distinct)
        {
          link_contacts.push_back({cp.point, contact_normal(object, cp.point, x, cp.face_index),
                                   static_cast<int>(f), static_cast<int>(k)});
        }
      }
      out.contacts.insert(out.contacts.end(), link_contacts.begin(), link_contacts.end());
    }
  }
  return out;
}

FingerClosure close_fingers(const EndEffectorModel& ee, const Pose& palm_pose, const TriMesh& object,
                            const ClosingOptions& options)
{
  return close_fingers(ee, palm_pose, MeshProximity(object), options);
}

}  // namespace graspforge
