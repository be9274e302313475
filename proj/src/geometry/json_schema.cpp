#include "graspforge/json_schema.hpp"

#include <cmath>

namespace graspforge::json_io
{

std::string child(const std::string& path, const std::string& key)
{
  return path + "/" + key;
}

std::string child(const std::string& path, std::size_t index)
{
  return path + "/" + std::to_string(index);
}

const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& path)
{
  if (!obj.is_object())
  {
    throw SchemaError(path.empty() ? "/" : path, "expected an object");
  }
  auto it = obj.find(key);
  if (it == obj.end())
  {
    throw SchemaError(child(path, key), "missing required key '" + key + "'");
  }
  return *it;
}

std::string read_string(const nlohmann::json& obj, const std::string& key, const std::string& path)
{
  const auto& v = require(obj, key, path);
  if (!v.is_string())
  {
    throw SchemaError(child(path, key), "expected a string");
  }
  return v.get<std::string>();
}

double read_number(const nlohmann::json& value, const std::string& path)
{
  if (!value.is_number())
  {
    throw SchemaError(path, "expected a number");
  }
  const double d = value.get<double>();
  if (!std::isfinite(d))
  {
    throw SchemaError(path, "expected a finite number");
  }
  return d;
}

std::vector<double> read_numbers(const nlohmann::json& value, const std::string& path)
{
  if (!value.is_array())
  {
    throw SchemaError(path, "expected an array of numbers");
  }
  std::vector<double> out;
  out.reserve(value.size());
  for (std::size_t i = 0; i < value.size(); ++i)
  {
    out.push_back(read_number(value[i], child(path, i)));
  }
  return out;
}

Eigen::Vector3d read_vec3(const nlohmann::json& value, const std::string& path)
{
  const auto v = read_numbers(value, path);
  if (v.size() != 3)
  {
    throw SchemaError(path, "expected exactly 3 numbers");
  }
  return {v[0], v[1], v[2]};
}

Pose read_pose(const nlohmann::json& value, const std::string& path)
{
  if (!value.is_object())
  {
    throw SchemaError(path, "expected a pose object");
  }
  Eigen::Vector3d xyz = Eigen::Vector3d::Zero();
  if (value.contains("xyz"))
  {
    xyz = read_vec3(value["xyz"], child(path, "xyz"));
  }
  if (value.contains("quat") && value.contains("rpy"))
  {
    throw SchemaError(path, "give either 'quat' or 'rpy', not both");
  }
  if (value.contains("quat"))
  {
    const auto q = read_numbers(value["quat"], child(path, "quat"));
    if (q.size() != 4)
    {
      throw SchemaError(child(path, "quat"), "expected [x, y, z, w]");
    }
    const Eigen::Quaterniond quat(q[3], q[0], q[1], q[2]);
    if (quat.norm() < 1e-9)
    {
      throw SchemaError(child(path, "quat"), "zero-length quaternion");
    }
    return {xyz, quat.normalized()};
  }
  if (value.contains("rpy"))
  {
    return Pose::from_xyz_rpy(xyz, read_vec3(value["rpy"], child(path, "rpy")));
  }
  return Pose::translation(xyz);
}

nlohmann::json write_vec3(const Eigen::Vector3d& v)
{
  return nlohmann::json::array({v.x(), v.y(), v.z()});
}

nlohmann::json write_pose(const Pose& pose)
{
  const auto& q = pose.orientation;
  return {{"xyz", write_vec3(pose.position)}, {"quat", {q.x(), q.y(), q.z(), q.w()}}};
}

}  // namespace graspforge::json_io
