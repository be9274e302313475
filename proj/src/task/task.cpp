#include "graspforge/task/task.hpp"

#include <algorithm>
#include <fstream>

#include "graspforge/geometry/errors.hpp"
#include "graspforge/geometry/mesh_io.hpp"
#include "graspforge/geometry/primitives.hpp"

namespace graspforge
{
namespace
{

using json_io::child;
using json_io::require;

double positive(const nlohmann::json& obj, const std::string& key, const std::string& path)
{
  const double v = json_io::read_number(require(obj, key, path), child(path, key));
  if (!(v > 0.0))
  {
    throw InvalidObjectError(child(path, key), "must be positive");
  }
  return v;
}

TriMesh inline_mesh(const nlohmann::json& g, const std::string& path)
{
  const auto& verts = require(g, "vertices", path);
  const auto& faces = require(g, "faces", path);
  if (!verts.is_array() || !faces.is_array())
  {
    throw SchemaError(path, "inline geometry needs 'vertices' and 'faces' arrays");
  }
  std::vector<Eigen::Vector3d> v;
  for (std::size_t i = 0; i < verts.size(); ++i)
  {
    v.push_back(json_io::read_vec3(verts[i], child(child(path, "vertices"), i)));
  }
  std::vector<Face> f;
  for (std::size_t i = 0; i < faces.size(); ++i)
  {
    const std::string fp = child(child(path, "faces"), i);
    if (!faces[i].is_array() || faces[i].size() != 3 ||
        !std::all_of(faces[i].begin(), faces[i].end(), [](const auto& x) { return x.is_number_integer(); }))
    {
      throw SchemaError(fp, "expected three integer vertex indices");
    }
    f.push_back({faces[i][0].get<int>(), faces[i][1].get<int>(), faces[i][2].get<int>()});
  }
  try
  {
    return TriMesh(std::move(v), std::move(f));
  }
  catch (const InvalidGeometryError& e)
  {
    throw InvalidObjectError(path, e.what());
  }
}

std::vector<Eigen::Vector3d> read_tolerances(const nlohmann::json& doc, const std::string& key, std::size_t steps)
{
  const std::string path = "/" + key;
  if (!doc.contains(key))
  {
    return std::vector<Eigen::Vector3d>(steps, Eigen::Vector3d::Zero());
  }
  const auto& arr = doc[key];
  if (!arr.is_array())
  {
    throw SchemaError(path, "expected an array of [x, y, z] tolerances");
  }
  if (arr.size() != steps)
  {
    throw SchemaError(path, "has " + std::to_string(arr.size()) + " entries but there are " + std::to_string(steps) +
                                " steps");
  }
  std::vector<Eigen::Vector3d> out;
  for (std::size_t i = 0; i < arr.size(); ++i)
  {
    const Eigen::Vector3d t = json_io::read_vec3(arr[i], child(path, i));
    for (int k = 0; k < 3; ++k)
    {
      if (t(k) < 0.0)
      {
        throw NegativeToleranceError(child(child(path, i), k), "tolerance must be non-negative");
      }
    }
    out.push_back(t);
  }
  return out;
}

}  // namespace

ObjectInfo ObjectInfo::from_mesh(const TriMesh& mesh, const Pose& pose)
{
  if (mesh.empty())
  {
    throw InvalidObjectError("/object/geometry", "object mesh has no faces");
  }
  ObjectInfo o;
  nlohmann::json verts = nlohmann::json::array();
  for (const auto& v : mesh.vertices())
  {
    verts.push_back(json_io::write_vec3(v));
  }
  nlohmann::json faces = nlohmann::json::array();
  for (const auto& f : mesh.faces())
  {
    faces.push_back({f[0], f[1], f[2]});
  }
  o.geometry = {{"type", "inline"}, {"vertices", std::move(verts)}, {"faces", std::move(faces)}};
  o.mesh = mesh;
  o.digest = mesh_digest(mesh);
  o.pose = pose;
  return o;
}

ObjectInfo parse_object(const nlohmann::json& doc, const std::filesystem::path& base_dir, const std::string& path)
{
  const auto& g = require(doc, "geometry", path);
  const std::string gpath = child(path, "geometry");
  const std::string type = json_io::read_string(g, "type", gpath);

  ObjectInfo o;
  o.geometry = g;
  if (type == "box")
  {
    const Eigen::Vector3d d = json_io::read_vec3(require(g, "dimensions", gpath), child(gpath, "dimensions"));
    if (!(d.array() > 0.0).all())
    {
      throw InvalidObjectError(child(gpath, "dimensions"), "box dimensions must be positive");
    }
    o.mesh = make_box(d);
  }
  else if (type == "cylinder")
  {
    o.mesh = make_cylinder(positive(g, "radius", gpath), positive(g, "height", gpath));
  }
  else if (type == "sphere")
  {
    o.mesh = make_icosphere(positive(g, "radius", gpath), 3);
  }
  else if (type == "mesh")
  {
    const std::string file = json_io::read_string(g, "file", gpath);
    std::filesystem::path p(file);
    if (p.is_relative())
    {
      p = base_dir / p;
    }
    if (!std::filesystem::exists(p))
    {
      throw MissingMeshError(child(gpath, "file"), "mesh file '" + p.string() + "' does not exist");
    }
    try
    {
      o.mesh = load_mesh(p.string());
    }
    catch (const std::exception& e)
    {
      throw InvalidObjectError(child(gpath, "file"), e.what());
    }
  }
  else if (type == "inline")
  {
    o.mesh = inline_mesh(g, gpath);
  }
  else
  {
    throw SchemaError(child(gpath, "type"), "unknown geometry type '" + type + "'");
  }
  if (o.mesh.empty())
  {
    throw InvalidObjectError(gpath, "object geometry has no faces");
  }
  o.digest = mesh_digest(o.mesh);
  if (doc.contains("pose"))
  {
    o.pose = json_io::read_pose(doc["pose"], child(path, "pose"));
  }
  return o;
}

JointConfig parse_joint_config(const nlohmann::json& doc, const std::string& path)
{
  if (!doc.is_object())
  {
    throw SchemaError(path, "expected an object");
  }
  JointConfig out;
  if (doc.contains("name") && doc.contains("position"))
  {
    const auto& names = doc["name"];
    if (!names.is_array() || !std::all_of(names.begin(), names.end(), [](const auto& n) { return n.is_string(); }))
    {
      throw SchemaError(child(path, "name"), "expected an array of joint names");
    }
    const auto values = json_io::read_numbers(doc["position"], child(path, "position"));
    if (values.size() != names.size())
    {
      throw SchemaError(child(path, "position"), "length differs from 'name'");
    }
    for (std::size_t i = 0; i < values.size(); ++i)
    {
      out[names[i].get<std::string>()] = values[i];
    }
    return out;
  }
  for (const auto& [name, value] : doc.items())
  {
    out[name] = json_io::read_number(value, child(path, name));
  }
  return out;
}

TaskDescription parse_task(const nlohmann::json& doc, const Robot& robot, const std::filesystem::path& base_dir)
{
  if (!doc.is_object())
  {
    throw SchemaError("/", "task document must be a JSON object");
  }
  TaskDescription task;
  task.ee_group = json_io::read_string(doc, "ee_group", "");
  if (!robot.find_end_effector(task.ee_group))
  {
    throw UnknownEndEffectorError("/ee_group", "robot '" + robot.name + "' has no end effector '" + task.ee_group + "'");
  }
  task.object = parse_object(require(doc, "object", ""), base_dir, "/object");

  const auto& steps = require(doc, "steps", "");
  if (!steps.is_array() || steps.empty())
  {
    throw SchemaError("/steps", "expected a non-empty array of object poses");
  }
  const auto tol_pos = read_tolerances(doc, "tol_pos", steps.size());
  const auto tol_rot = read_tolerances(doc, "tol_rot", steps.size());
  for (std::size_t i = 0; i < steps.size(); ++i)
  {
    task.steps.push_back({json_io::read_pose(steps[i], child("/steps", i)), tol_pos[i], tol_rot[i]});
  }

  task.start_arm_config = parse_joint_config(require(doc, "start_arm_config", ""), "/start_arm_config");
  for (const auto& joint : robot.arm.joints())
  {
    auto it = task.start_arm_config.find(joint.name);
    if (it == task.start_arm_config.end())
    {
      throw SchemaError(child("/start_arm_config", joint.name), "missing arm joint '" + joint.name + "'");
    }
    if (it->second < joint.lower - 1e-9 || it->second > joint.upper + 1e-9)
    {
      throw SchemaError(child("/start_arm_config", joint.name), "value outside joint limits");
    }
  }
  for (const auto& [name, value] : task.start_arm_config)
  {
    const auto& joints = robot.arm.joints();
    if (std::none_of(joints.begin(), joints.end(), [&](const Joint& j) { return j.name == name; }))
    {
      throw SchemaError(child("/start_arm_config", name), "'" + name + "' is not an arm joint");
    }
  }
  return task;
}

TaskDescription load_task(const std::string& path, const Robot& robot)
{
  std::ifstream in(path);
  if (!in)
  {
    throw std::runtime_error("cannot open task file '" + path + "'");
  }
  nlohmann::json doc;
  try
  {
    doc = nlohmann::json::parse(in);
  }
  catch (const nlohmann::json::parse_error& e)
  {
    throw SchemaError("/", std::string("task file is not valid JSON: ") + e.what());
  }
  return parse_task(doc, robot, std::filesystem::path(path).parent_path());
}

nlohmann::json serialize_object(const ObjectInfo& object)
{
  return {{"geometry", object.geometry}, {"pose", json_io::write_pose(object.pose)}};
}

nlohmann::json serialize_task(const TaskDescription& task)
{
  nlohmann::json steps = nlohmann::json::array();
  nlohmann::json tol_pos = nlohmann::json::array();
  nlohmann::json tol_rot = nlohmann::json::array();
  for (const auto& s : task.steps)
  {
    steps.push_back(json_io::write_pose(s.pose));
    tol_pos.push_back(json_io::write_vec3(s.tol_pos));
    tol_rot.push_back(json_io::write_vec3(s.tol_rot));
  }
  nlohmann::json start = nlohmann::json::object();
  for (const auto& [name, value] : task.start_arm_config)
  {
    start[name] = value;
  }
  return {{"ee_group", task.ee_group},
          {"object", serialize_object(task.object)},
          {"steps", std::move(steps)},
          {"tol_pos", std::move(tol_pos)},
          {"tol_rot", std::move(tol_rot)},
          {"start_arm_config", std::move(start)}};
}

TaskDescription update_object(const TaskDescription& task, const ObjectInfo& new_object)
{
  if (new_object.mesh.empty())
  {
    throw InvalidObjectError("/object/geometry", "replacement object has no faces");
  }
  TaskDescription out = task;
  out.object = new_object;
  out.object.digest = mesh_digest(new_object.mesh);
  return out;
}

nlohmann::json serialize_grasp(const Grasp& grasp)
{
  nlohmann::json fingers = nlohmann::json::object();
  for (const auto& [name, value] : grasp.finger_config)
  {
    fingers[name] = value;
  }
  nlohmann::json j{{"tcp_in_object", json_io::write_pose(grasp.tcp_in_object)},
                   {"finger_config", std::move(fingers)},
                   {"ee_name", grasp.ee_name}};
  if (!grasp.contacts.empty())
  {
    nlohmann::json contacts = nlohmann::json::array();
    for (const auto& c : grasp.contacts)
    {
      contacts.push_back({{"point", json_io::write_vec3(c.point)},
                          {"normal", json_io::write_vec3(c.normal)},
                          {"finger", c.finger},
                          {"link", c.link}});
    }
    j["contacts"] = std::move(contacts);
  }
  return j;
}

void validate_grasp(const Grasp& g, const EndEffectorModel& ee, const std::string& path)
{
  if (g.ee_name != ee.name)
  {
    throw UnknownEndEffectorError(child(path, "ee_name"), "grasp is for '" + g.ee_name + "', expected '" + ee.name + "'");
  }
  if (!ee.within_finger_limits(g.finger_config, 1e-9))
  {
    throw SchemaError(child(path, "finger_config"), "finger configuration missing joints or outside limits");
  }
}

Grasp parse_grasp(const nlohmann::json& doc, const std::string& path)
{
  Grasp g;
  g.tcp_in_object = json_io::read_pose(require(doc, "tcp_in_object", path), child(path, "tcp_in_object"));
  g.finger_config = parse_joint_config(require(doc, "finger_config", path), child(path, "finger_config"));
  g.ee_name = json_io::read_string(doc, "ee_name", path);
  if (doc.contains("contacts"))
  {
    const auto& cs = doc["contacts"];
    const std::string cpath = child(path, "contacts");
    if (!cs.is_array())
    {
      throw SchemaError(cpath, "expected an array");
    }
    for (std::size_t i = 0; i < cs.size(); ++i)
    {
      const std::string p = child(cpath, i);
      Contact c;
      c.point = json_io::read_vec3(require(cs[i], "point", p), child(p, "point"));
      c.normal = json_io::read_vec3(require(cs[i], "normal", p), child(p, "normal"));
      c.finger = static_cast<int>(json_io::read_number(require(cs[i], "finger", p), child(p, "finger")));
      c.link = static_cast<int>(json_io::read_number(require(cs[i], "link", p), child(p, "link")));
      g.contacts.push_back(c);
    }
  }
  return g;
}

}  // namespace graspforge
