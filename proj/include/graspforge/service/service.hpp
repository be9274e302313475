#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graspforge/geometry/point_cloud.hpp"
#include "graspforge/planner/planner.hpp"

namespace graspforge
{

/// Request-level failure with the HTTP status it maps to. `details` is merged
/// into the error body.
class ServiceError : public std::runtime_error
{
public:
  ServiceError(int status, std::string path, const std::string& message, nlohmann::json details = nlohmann::json::object())
    : std::runtime_error(message), status_(status), path_(std::move(path)), details_(std::move(details))
  {
  }

  int status() const { return status_; }
  const std::string& path() const { return path_; }
  const nlohmann::json& details() const { return details_; }

private:
  int status_;
  std::string path_;
  nlohmann::json details_;
};

struct ServiceOptions
{
  PlannerConfig planner;
  std::filesystem::path asset_dir;  // mesh files named in task documents resolve here
  int jobs = 1;
  std::size_t max_cloud_points = 5'000'000;
};

/// Immutable view of one session. Every mutation publishes a new one.
struct SessionSnapshot
{
  TaskDescription task;
  std::optional<std::vector<GraspCandidate>> result;
  std::optional<std::size_t> selected;  // < result->size() when set
  std::optional<RoiBox> roi;
  std::uint64_t revision = 0;
  std::uint64_t result_revision = 0;  // revision that produced `result`
  nlohmann::json scene;                // display bundle, content_hash included
};

/// Session-holding front end of the planner. Methods take and return the wire
/// documents; failures throw ServiceError or SchemaError.
///
/// Mutations on one session are serialized by a per-session writer lock and
/// bump the revision exactly once when they succeed. A failed mutation leaves
/// the session untouched. Reads never take the writer lock.
class GraspService
{
public:
  explicit GraspService(ServiceOptions options);
  ~GraspService();

  /// {robot, task} -> {id, revision}
  nlohmann::json create_session(const nlohmann::json& body);
  std::vector<std::string> session_ids() const;

  nlohmann::json state(const std::string& id) const;
  nlohmann::json scene(const std::string& id) const;
  std::shared_ptr<const SessionSnapshot> snapshot(const std::string& id) const;

  /// {seed?, top?, jobs?, config?} -> candidate summaries. Empty results succeed.
  nlohmann::json plan(const std::string& id, const nlohmann::json& body);
  nlohmann::json grasps(const std::string& id) const;
  /// {stage, fraction, running}
  nlohmann::json progress(const std::string& id) const;

  /// {index, revision?} -> {revision, selected, waypoints}
  nlohmann::json select(const std::string& id, const nlohmann::json& body);
  /// {object: {geometry, pose?}, revision?}
  nlohmann::json update_object(const std::string& id, const nlohmann::json& body);
  /// {steps, tol_pos?, tol_rot?, revision?}; clears the result like an object swap.
  nlohmann::json update_steps(const std::string& id, const nlohmann::json& body);
  /// {cloud: text | [[x,y,z],...], box: {center, half_extents}, revision?}
  nlohmann::json apply_roi(const std::string& id, const nlohmann::json& body);

  int generator_invocations() const;
  GraspCache& cache() { return *cache_; }

private:
  struct Session;
  std::shared_ptr<Session> find(const std::string& id) const;

  ServiceOptions options_;
  std::shared_ptr<GraspCache> cache_;
  std::unique_ptr<GraspPlanner> planner_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

/// Scene bundle for a snapshot's contents (without content_hash).
nlohmann::json build_scene(const std::string& id, const Robot& robot, const SessionSnapshot& s);

/// Text ("x y z" lines) or an array of triples; at most `max_points`.
PointCloud parse_cloud_body(const nlohmann::json& value, std::size_t max_points, const std::string& path);
RoiBox parse_roi_box(const nlohmann::json& value, const std::string& path);

}  // namespace graspforge
