#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graspforge/geometry/digest.hpp"
#include "graspforge/geometry/pose.hpp"
#include "graspforge/geometry/tri_mesh.hpp"
#include "graspforge/json_schema.hpp"
#include "graspforge/kinematics/end_effector.hpp"
#include "graspforge/kinematics/ik.hpp"
#include "graspforge/kinematics/robot.hpp"

namespace graspforge
{

// Every task validation error is a SchemaError and carries the JSON path.
class MissingMeshError : public SchemaError
{
public:
  using SchemaError::SchemaError;
};

class UnknownEndEffectorError : public SchemaError
{
public:
  using SchemaError::SchemaError;
};

class NegativeToleranceError : public SchemaError
{
public:
  using SchemaError::SchemaError;
};

class InvalidObjectError : public SchemaError
{
public:
  using SchemaError::SchemaError;
};

/// Object geometry plus the descriptor it was built from. The mesh is in the
/// object frame; `pose` places it in the world.
struct ObjectInfo
{
  nlohmann::json geometry;  // descriptor as written in the task file
  TriMesh mesh;
  MeshDigest digest;
  Pose pose;

  /// Wraps an already-built mesh with an inline descriptor.
  /// Throws InvalidObjectError for an empty mesh.
  static ObjectInfo from_mesh(const TriMesh& mesh, const Pose& pose = {});
};

struct TaskDescription
{
  std::string ee_group;
  ObjectInfo object;
  std::vector<TolerancedStep> steps;
  JointConfig start_arm_config;
};

/// Pose of the TCP in the object frame plus the finger joint values.
struct Grasp
{
  Pose tcp_in_object;
  JointConfig finger_config;
  std::string ee_name;
  std::vector<Contact> contacts;  // object frame; empty when unknown
};

/// Builds an object from a geometry descriptor; mesh files resolve against `base_dir`.
ObjectInfo parse_object(const nlohmann::json& doc, const std::filesystem::path& base_dir, const std::string& path);

/// Validates the document against `robot`. Throws SchemaError or one of its
/// subclasses above.
TaskDescription parse_task(const nlohmann::json& doc, const Robot& robot, const std::filesystem::path& base_dir);
TaskDescription load_task(const std::string& path, const Robot& robot);

nlohmann::json serialize_object(const ObjectInfo& object);
nlohmann::json serialize_task(const TaskDescription& task);

/// World pose of the TCP while the object sits at `step_pose`.
inline Pose tcp_world_pose(const Pose& step_pose, const Grasp& grasp)
{
  return step_pose * grasp.tcp_in_object;
}

/// Same task with a different object. Throws InvalidObjectError for empty geometry.
TaskDescription update_object(const TaskDescription& task, const ObjectInfo& new_object);

nlohmann::json serialize_grasp(const Grasp& grasp);
Grasp parse_grasp(const nlohmann::json& doc, const std::string& path);
/// Rejects a grasp for another hand or with finger values outside limits.
void validate_grasp(const Grasp& grasp, const EndEffectorModel& ee, const std::string& path);

/// Reads {name: value} or {name: [...], position: [...]}.
JointConfig parse_joint_config(const nlohmann::json& doc, const std::string& path);

}  // namespace graspforge
