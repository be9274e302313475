#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "graspforge/geometry/pose.hpp"

namespace graspforge
{

/// Document does not match the expected shape. `path()` names the offending
/// field as a JSON pointer, e.g. "/steps/2/quat".
class SchemaError : public std::runtime_error
{
public:
  SchemaError(std::string path, const std::string& message)
    : std::runtime_error(path + ": " + message), path_(std::move(path))
  {
  }

  const std::string& path() const { return path_; }

private:
  std::string path_;
};

namespace json_io
{

std::string child(const std::string& path, const std::string& key);
std::string child(const std::string& path, std::size_t index);

const nlohmann::json& require(const nlohmann::json& obj, const std::string& key, const std::string& path);
std::string read_string(const nlohmann::json& obj, const std::string& key, const std::string& path);
double read_number(const nlohmann::json& value, const std::string& path);
Eigen::Vector3d read_vec3(const nlohmann::json& value, const std::string& path);
std::vector<double> read_numbers(const nlohmann::json& value, const std::string& path);

/// {"xyz": [..], "quat": [x, y, z, w]} or {"xyz": [..], "rpy": [..]}; missing
/// parts default to identity. Quaternions are normalized; a zero quaternion is rejected.
Pose read_pose(const nlohmann::json& value, const std::string& path);

/// Always emits {"xyz": [...], "quat": [x, y, z, w]}.
nlohmann::json write_pose(const Pose& pose);
nlohmann::json write_vec3(const Eigen::Vector3d& v);

}  // namespace json_io
}  // namespace graspforge
