#include "graspforge/kinematics/robot.hpp"

#include <fstream>

#include "graspforge/json_schema.hpp"

namespace graspforge
{
namespace
{

using json_io::child;

Joint parse_joint(const nlohmann::json& j, const std::string& path)
{
  Joint joint;
  joint.name = json_io::read_string(j, "name", path);
  const std::string type = j.value("type", "revolute");
  if (type == "revolute")
  {
    joint.type = JointType::revolute;
  }
  else if (type == "prismatic")
  {
    joint.type = JointType::prismatic;
  }
  else
  {
    throw SchemaError(child(path, "type"), "unknown joint type '" + type + "'");
  }
  if (j.contains("origin"))
  {
    joint.origin = json_io::read_pose(j["origin"], child(path, "origin"));
  }
  joint.axis = json_io::read_vec3(json_io::require(j, "axis", path), child(path, "axis"));
  const auto limits = json_io::read_numbers(json_io::require(j, "limits", path), child(path, "limits"));
  if (limits.size() != 2)
  {
    throw SchemaError(child(path, "limits"), "expected [lower, upper]");
  }
  joint.lower = limits[0];
  joint.upper = limits[1];
  return joint;
}

Capsule parse_capsule(const nlohmann::json& j, const std::string& path)
{
  const auto& seg = json_io::require(j, "segment", path);
  if (!seg.is_array() || seg.size() != 2)
  {
    throw SchemaError(child(path, "segment"), "expected [p0, p1]");
  }
  Capsule c;
  c.p0 = json_io::read_vec3(seg[0], child(child(path, "segment"), 0));
  c.p1 = json_io::read_vec3(seg[1], child(child(path, "segment"), 1));
  c.radius = json_io::read_number(json_io::require(j, "radius", path), child(path, "radius"));
  if (c.radius < 0.0)
  {
    throw SchemaError(child(path, "radius"), "radius must be non-negative");
  }
  return c;
}

std::vector<Capsule> parse_capsules(const nlohmann::json& arr, const std::string& path)
{
  if (!arr.is_array())
  {
    throw SchemaError(path, "expected an array");
  }
  std::vector<Capsule> out;
  for (std::size_t i = 0; i < arr.size(); ++i)
  {
    out.push_back(parse_capsule(arr[i], child(path, i)));
  }
  return out;
}

EndEffectorModel parse_end_effector(const nlohmann::json& j, const std::string& path)
{
  EndEffectorModel ee;
  ee.name = json_io::read_string(j, "name", path);
  ee.palm_frame = j.value("palm_frame", "palm");
  if (j.contains("mount"))
  {
    ee.mount = json_io::read_pose(j["mount"], child(path, "mount"));
  }
  if (j.contains("tcp_offset"))
  {
    ee.tcp_offset = json_io::read_pose(j["tcp_offset"], child(path, "tcp_offset"));
  }
  if (j.contains("palm"))
  {
    ee.palm = parse_capsules(j["palm"], child(path, "palm"));
  }
  const auto& fingers = json_io::require(j, "fingers", path);
  const std::string fpath = child(path, "fingers");
  if (!fingers.is_array() || fingers.empty())
  {
    throw SchemaError(fpath, "expected a non-empty array of fingers");
  }
  for (std::size_t f = 0; f < fingers.size(); ++f)
  {
    const std::string p = child(fpath, f);
    Finger finger;
    const auto& joints = json_io::require(fingers[f], "joints", p);
    if (!joints.is_array())
    {
      throw SchemaError(child(p, "joints"), "expected an array");
    }
    for (std::size_t k = 0; k < joints.size(); ++k)
    {
      finger.joints.push_back(parse_joint(joints[k], child(child(p, "joints"), k)));
    }
    finger.open = json_io::read_numbers(json_io::require(fingers[f], "open", p), child(p, "open"));
    finger.closed = json_io::read_numbers(json_io::require(fingers[f], "closed", p), child(p, "closed"));
    finger.links = parse_capsules(json_io::require(fingers[f], "links", p), child(p, "links"));
    ee.fingers.push_back(std::move(finger));
  }
  try
  {
    ee.validate();
  }
  catch (const KinematicsError& e)
  {
    throw SchemaError(path, e.what());
  }
  return ee;
}

}  // namespace

const EndEffectorModel* Robot::find_end_effector(const std::string& ee_name) const
{
  for (const auto& ee : end_effectors)
  {
    if (ee.name == ee_name)
    {
      return &ee;
    }
  }
  return nullptr;
}

const EndEffectorModel& Robot::end_effector(const std::string& ee_name) const
{
  if (const auto* ee = find_end_effector(ee_name))
  {
    return *ee;
  }
  throw KinematicsError("robot '" + name + "' has no end effector named '" + ee_name + "'");
}

Robot parse_robot(const nlohmann::json& doc)
{
  Robot robot;
  robot.name = json_io::read_string(doc, "name", "");
  const std::string base = doc.value("base_frame", "base_link");
  const std::string tip = doc.value("tip_frame", "tool0");

  const auto& joints = json_io::require(doc, "joints", "");
  if (!joints.is_array() || joints.empty())
  {
    throw SchemaError("/joints", "expected a non-empty array");
  }
  Pose tip_offset;
  if (doc.contains("tip_offset"))
  {
    tip_offset = json_io::read_pose(doc["tip_offset"], "/tip_offset");
  }
  std::vector<Joint> parsed;
  for (std::size_t i = 0; i < joints.size(); ++i)
  {
    parsed.push_back(parse_joint(joints[i], child("/joints", i)));
  }
  try
  {
    robot.arm = KinematicChain(base, tip, std::move(parsed), tip_offset);
  }
  catch (const KinematicsError& e)
  {
    throw SchemaError("/joints", e.what());
  }

  if (doc.contains("end_effectors"))
  {
    const auto& ees = doc["end_effectors"];
    if (!ees.is_array())
    {
      throw SchemaError("/end_effectors", "expected an array");
    }
    for (std::size_t i = 0; i < ees.size(); ++i)
    {
      auto ee = parse_end_effector(ees[i], child("/end_effectors", i));
      if (robot.find_end_effector(ee.name))
      {
        throw SchemaError(child("/end_effectors", i), "duplicate end effector '" + ee.name + "'");
      }
      robot.end_effectors.push_back(std::move(ee));
    }
  }
  return robot;
}

Robot load_robot(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw std::runtime_error("cannot open robot description '" + path + "'");
  }
  nlohmann::json doc;
  try
  {
    doc = nlohmann::json::parse(in);
  }
  catch (const nlohmann::json::parse_error& e)
  {
    throw SchemaError("/", std::string("robot description is not valid JSON: ") + e.what());
  }
  return parse_robot(doc);
}

}  // namespace graspforge
