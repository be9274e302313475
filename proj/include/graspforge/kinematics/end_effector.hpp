#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "graspforge/geometry/proximity.hpp"
#include "graspforge/geometry/tri_mesh.hpp"
#include "graspforge/kinematics/chain.hpp"

namespace graspforge
{

/// Sphere-swept segment in a link frame.
struct Capsule
{
  Eigen::Vector3d p0 = Eigen::Vector3d::Zero();
  Eigen::Vector3d p1 = Eigen::Vector3d::Zero();
  double radius = 0.0;
};

/// Serial finger attached to the palm frame; link i rides on joint i.
struct Finger
{
  std::vector<Joint> joints;
  std::vector<double> open;
  std::vector<double> closed;
  std::vector<Capsule> links;
};

class EndEffectorModel
{
public:
  std::string name;
  std::string palm_frame = "palm";
  Pose mount;       // palm frame in the arm's tip frame
  Pose tcp_offset;  // TCP in the palm frame
  std::vector<Capsule> palm;
  std::vector<Finger> fingers;

  /// Throws KinematicsError when a finger is malformed or open/closed
  /// values fall outside joint limits.
  void validate() const;

  std::vector<std::string> finger_joint_names() const;
  JointConfig open_config() const;
  JointConfig closed_config() const;
  bool within_finger_limits(const JointConfig& config, double slack = 1e-9) const;

  /// Palm pose that puts the TCP at `tcp` (both in the same frame).
  Pose palm_from_tcp(const Pose& tcp) const { return tcp * tcp_offset.inverse(); }

  /// Arm tip pose expressed in the object frame for a grasp TCP pose.
  Pose tip_from_tcp(const Pose& tcp) const { return tcp * tcp_offset.inverse() * mount.inverse(); }

  /// Frames of every finger link given the palm pose, indexed [finger][link].
  std::vector<std::vector<Pose>> link_frames(const Pose& palm_pose, const JointConfig& fingers_config) const;

  /// Largest distance from the palm origin to any swept surface at the open config.
  double reach_radius() const;

  /// Gap between the two finger surfaces at the open config; only meaningful
  /// for two-finger grippers.
  double max_opening() const;
};

struct Contact
{
  Eigen::Vector3d point = Eigen::Vector3d::Zero();   // on the object surface
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();  // outward object normal
  int finger = -1;
  int link = -1;
};

struct FingerClosure
{
  JointConfig finger_config;
  std::vector<Contact> contacts;

  /// Number of distinct finger links touching the object.
  int touching_links() const;
};

class PenetrationError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct ClosingOptions
{
  double revolute_step = 0.01;    // rad
  double prismatic_step = 0.001;  // m
  double contact_epsilon = 1e-4;  // m
};

/// Signed clearance of a world-space capsule: negative when penetrating.
double capsule_clearance(const MeshProximity& object, const Capsule& capsule, bool check_inside);

/// Lowest signed clearance over the palm capsules placed at `palm_pose`.
double palm_clearance(const EndEffectorModel& ee, const Pose& palm_pose, const MeshProximity& object);

/// Steps every finger joint from open toward closed. A link that comes
/// within contact_epsilon of the surface stops together with all joints
/// proximal to it; distal joints keep closing. `palm_pose` is expressed in
/// the object frame. Throws PenetrationError when the palm or a finger
/// starts inside the object.
FingerClosure close_fingers(const EndEffectorModel& ee, const Pose& palm_pose, const MeshProximity& object,
                            const ClosingOptions& options = {});

FingerClosure close_fingers(const EndEffectorModel& ee, const Pose& palm_pose, const TriMesh& object,
                            const ClosingOptions& options = {});

}  // namespace graspforge
