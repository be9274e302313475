#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graspforge/kinematics/chain.hpp"
#include "graspforge/kinematics/end_effector.hpp"

namespace graspforge
{

/// One serial arm with one or more hands mounted at its tip.
struct Robot
{
  std::string name;
  KinematicChain arm;
  std::vector<EndEffectorModel> end_effectors;

  const EndEffectorModel* find_end_effector(const std::string& ee_name) const;
  /// Throws KinematicsError for unknown names.
  const EndEffectorModel& end_effector(const std::string& ee_name) const;
};

/// Throws SchemaError (with a JSON-pointer path) on malformed documents.
Robot parse_robot(const nlohmann::json& doc);
Robot load_robot(const std::string& path);

}  // namespace graspforge
