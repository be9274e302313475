#include "graspforge/service/service.hpp"

#include <atomic>
#include <thread>

#include "graspforge/geometry/digest.hpp"
#include "graspforge/geometry/errors.hpp"

namespace graspforge
{

using nlohmann::json;

struct GraspService::Session
{
  std::string id;
  Robot robot;
  std::mutex writer;
  // read and replaced only through std::atomic_load / std::atomic_store
  std::shared_ptr<const SessionSnapshot> current;

  std::mutex progress_mutex;
  std::string stage = "idle";
  double fraction = 0.0;
  bool running = false;

  std::shared_ptr<const SessionSnapshot> load() const { return std::atomic_load(&current); }

  void publish(SessionSnapshot next)
  {
    next.scene = build_scene(id, robot, next);
    next.scene["content_hash"] = sha256_hex(next.scene.dump());
    std::atomic_store(&current, std::shared_ptr<const SessionSnapshot>(
                                    std::make_shared<SessionSnapshot>(std::move(next))));
  }

  void set_progress(const std::string& s, double f, bool r)
  {
    std::lock_guard lock(progress_mutex);
    stage = s;
    fraction = f;
    running = r;
  }
};

namespace
{

const json& object_body(const json& body)
{
  // an absent body arrives as null and means "no fields"
  if (!body.is_object() && !body.is_null())
  {
    throw SchemaError("", "request body must be a JSON object");
  }
  return body;
}

// Re-roots a nested document's error under `prefix`.
[[noreturn]] void rethrow_under(const SchemaError& e, const std::string& prefix)
{
  std::string message = e.what();
  const std::string head = e.path() + ": ";
  if (message.rfind(head, 0) == 0)
  {
    message = message.substr(head.size());
  }
  throw SchemaError(prefix + e.path(), message);
}

std::uint64_t read_count(const json& body, const std::string& key, std::uint64_t fallback)
{
  if (!body.contains(key))
  {
    return fallback;
  }
  const json& v = body.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
  {
    throw SchemaError("/" + key, "must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

void check_revision(const json& body, const SessionSnapshot& s)
{
  if (!body.contains("revision"))
  {
    return;
  }
  const std::uint64_t r = read_count(body, "revision", 0);
  if (r != s.revision)
  {
    throw ServiceError(409, "/revision",
                       "stale revision " + std::to_string(r) + "; session is at " + std::to_string(s.revision),
                       {{"revision", s.revision}});
  }
}

json mesh_json(const TriMesh& mesh)
{
  json vertices = json::array();
  for (const auto& v : mesh.vertices())
  {
    vertices.push_back(json_io::write_vec3(v));
  }
  json faces = json::array();
  for (const auto& f : mesh.faces())
  {
    faces.push_back({f[0], f[1], f[2]});
  }
  return {{"vertices", std::move(vertices)}, {"faces", std::move(faces)}};
}

json roi_json(const std::optional<RoiBox>& roi)
{
  if (!roi)
  {
    return nullptr;
  }
  return {{"center", json_io::write_pose(roi->center)}, {"half_extents", json_io::write_vec3(roi->half_extents)}};
}

json optional_index(const std::optional<std::size_t>& i)
{
  return i ? json(*i) : json(nullptr);
}

json grasps_json(const SessionSnapshot& s)
{
  json out{{"revision", s.revision}};
  if (!s.result)
  {
    out["planned"] = false;
    out["result_revision"] = nullptr;
    out["count"] = 0;
    out["grasps"] = json::array();
    return out;
  }
  json grasps = serialize_candidates(*s.result)["grasps"];
  for (std::size_t i = 0; i < s.result->size(); ++i)
  {
    grasps[i]["index"] = i;
    for (std::size_t k = 0; k < s.task.steps.size(); ++k)
    {
      grasps[i]["per_step"][k]["tcp_world"] =
        json_io::write_pose(tcp_world_pose(s.task.steps[k].pose, (*s.result)[i].grasp));
    }
  }
  out["planned"] = true;
  out["result_revision"] = s.result_revision;
  out["count"] = s.result->size();
  out["grasps"] = std::move(grasps);
  if (s.result->empty())
  {
    out["message"] = "0 candidates";
  }
  return out;
}

json state_json(const std::string& id, const Robot& robot, const SessionSnapshot& s)
{
  return {{"id", id},
          {"revision", s.revision},
          {"robot", robot.name},
          {"ee_group", s.task.ee_group},
          {"step_count", s.task.steps.size()},
          {"object", {{"digest", s.task.object.digest.hex()}, {"pose", json_io::write_pose(s.task.object.pose)}}},
          {"planned", s.result.has_value()},
          {"candidate_count", s.result ? s.result->size() : 0},
          {"result_revision", s.result ? json(s.result_revision) : json(nullptr)},
          {"selected", optional_index(s.selected)},
          {"roi", roi_json(s.roi)},
          {"content_hash", s.scene.value("content_hash", "")}};
}

// The next revision of `s` with the plan result and selection dropped.
SessionSnapshot without_result(const SessionSnapshot& s)
{
  SessionSnapshot next = s;
  next.result.reset();
  next.selected.reset();
  next.result_revision = 0;
  ++next.revision;
  return next;
}

}  // namespace

json build_scene(const std::string& id, const Robot& robot, const SessionSnapshot& s)
{
  const TaskDescription& task = s.task;

  json steps = json::array();
  for (std::size_t k = 0; k < task.steps.size(); ++k)
  {
    const auto& st = task.steps[k];
    steps.push_back({{"index", k},
                     {"pose", json_io::write_pose(st.pose)},
                     {"tol_pos", json_io::write_vec3(st.tol_pos)},
                     {"tol_rot", json_io::write_vec3(st.tol_rot)}});
  }

  // joints missing from the start configuration are drawn at zero
  const KinematicChain& arm = robot.arm;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(arm.dof());
  for (int j = 0; j < arm.dof(); ++j)
  {
    const auto it = task.start_arm_config.find(arm.joints()[j].name);
    if (it != task.start_arm_config.end())
    {
      q[j] = it->second;
    }
  }
  const std::vector<Pose> frames = arm.joint_frames(q);
  json joints = json::array();
  for (int j = 0; j < arm.dof(); ++j)
  {
    joints.push_back({{"name", arm.joints()[j].name}, {"pose", json_io::write_pose(frames[j])}});
  }
  json ee_names = json::array();
  for (const auto& ee : robot.end_effectors)
  {
    ee_names.push_back(ee.name);
  }

  json candidates = json::array();
  if (s.result)
  {
    for (std::size_t i = 0; i < s.result->size(); ++i)
    {
      const GraspCandidate& c = (*s.result)[i];
      json tcp = json::array();
      json status = json::array();
      for (std::size_t k = 0; k < task.steps.size(); ++k)
      {
        tcp.push_back(json_io::write_pose(tcp_world_pose(task.steps[k].pose, c.grasp)));
        status.push_back(k < c.per_step_status.size() ? to_string(c.per_step_status[k]) : "exact");
      }
      candidates.push_back({{"index", i},
                            {"score", c.score},
                            {"tcp_world", std::move(tcp)},
                            {"status", std::move(status)},
                            {"selected", s.selected == i}});
    }
  }

  return {{"id", id},
          {"revision", s.revision},
          {"result_revision", s.result ? json(s.result_revision) : json(nullptr)},
          {"object",
           {{"mesh", mesh_json(task.object.mesh)},
            {"pose", json_io::write_pose(task.object.pose)},
            {"digest", task.object.digest.hex()}}},
          {"steps", std::move(steps)},
          {"robot",
           {{"name", robot.name},
            {"base_frame", arm.base_frame()},
            {"joints", std::move(joints)},
            {"tip", json_io::write_pose(arm.forward(q))},
            {"end_effectors", std::move(ee_names)},
            {"ee_group", task.ee_group}}},
          {"candidates", std::move(candidates)},
          {"selected", optional_index(s.selected)},
          {"roi", roi_json(s.roi)}};
}

PointCloud parse_cloud_body(const json& value, std::size_t max_points, const std::string& path)
{
  if (value.is_string())
  {
    try
    {
      return parse_cloud_text(value.get_ref<const std::string&>(), max_points);
    }
    catch (const CloudTooLargeError& e)
    {
      throw ServiceError(413, path, e.what());
    }
    catch (const InvalidGeometryError& e)
    {
      throw SchemaError(path, e.what());
    }
  }
  if (!value.is_array())
  {
    throw SchemaError(path, "cloud must be text or an array of [x, y, z]");
  }
  if (value.size() > max_points)
  {
    throw ServiceError(413, path,
                       "cloud has " + std::to_string(value.size()) + " points; the limit is " +
                         std::to_string(max_points));
  }
  std::vector<Eigen::Vector3d> points;
  points.reserve(value.size());
  for (std::size_t i = 0; i < value.size(); ++i)
  {
    points.push_back(json_io::read_vec3(value[i], json_io::child(path, i)));
  }
  return PointCloud(std::move(points));
}

RoiBox parse_roi_box(const json& value, const std::string& path)
{
  if (!value.is_object())
  {
    throw SchemaError(path, "box must be an object");
  }
  RoiBox box;
  box.center = json_io::read_pose(json_io::require(value, "center", path), json_io::child(path, "center"));
  const std::string hpath = json_io::child(path, "half_extents");
  box.half_extents = json_io::read_vec3(json_io::require(value, "half_extents", path), hpath);
  try
  {
    box.validate();
  }
  catch (const InvalidGeometryError& e)
  {
    throw SchemaError(hpath, e.what());
  }
  return box;
}

GraspService::GraspService(ServiceOptions options) : options_(std::move(options))
{
  if (options_.planner.cache_mode == GraspCache::Mode::disk)
  {
    cache_ = std::make_shared<GraspCache>(GraspCache::on_disk(options_.planner.cache_dir));
  }
  else
  {
    cache_ = std::make_shared<GraspCache>(GraspCache::in_memory());
  }
  planner_ = std::make_unique<GraspPlanner>(options_.planner, cache_);
  options_.jobs = std::max(1, options_.jobs);
}

GraspService::~GraspService() = default;

std::shared_ptr<GraspService::Session> GraspService::find(const std::string& id) const
{
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end())
  {
    throw ServiceError(404, "/id", "unknown session '" + id + "'");
  }
  return it->second;
}

json GraspService::create_session(const json& body)
{
  object_body(body);
  const json& robot_doc = json_io::require(body, "robot", "");
  const json& task_doc = json_io::require(body, "task", "");

  auto session = std::make_shared<Session>();
  try
  {
    session->robot = parse_robot(robot_doc);
  }
  catch (const SchemaError& e)
  {
    rethrow_under(e, "/robot");
  }
  SessionSnapshot first;
  try
  {
    first.task = parse_task(task_doc, session->robot, options_.asset_dir);
  }
  catch (const SchemaError& e)
  {
    rethrow_under(e, "/task");
  }

  {
    std::unique_lock lock(sessions_mutex_);
    session->id = "s" + std::to_string(next_id_++);
    sessions_[session->id] = session;
  }
  session->publish(std::move(first));
  return {{"id", session->id}, {"revision", 0}};
}

std::vector<std::string> GraspService::session_ids() const
{
  std::shared_lock lock(sessions_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_)
  {
    ids.push_back(id);
  }
  return ids;
}

std::shared_ptr<const SessionSnapshot> GraspService::snapshot(const std::string& id) const
{
  return find(id)->load();
}

json GraspService::state(const std::string& id) const
{
  const auto session = find(id);
  return state_json(id, session->robot, *session->load());
}

json GraspService::scene(const std::string& id) const
{
  return find(id)->load()->scene;
}

json GraspService::plan(const std::string& id, const json& body)
{
  object_body(body);
  const auto session = find(id);
  std::lock_guard writer(session->writer);
  const auto cur = session->load();
  check_revision(body, *cur);

  const std::uint64_t seed = read_count(body, "seed", 0);
  const std::uint64_t top = read_count(body, "top", 0);
  const int jobs = static_cast<int>(std::max<std::uint64_t>(1, read_count(body, "jobs", options_.jobs)));

  GraspPlanner* planner = planner_.get();
  std::unique_ptr<GraspPlanner> custom;
  if (body.contains("config"))
  {
    PlannerConfig config;
    try
    {
      config = PlannerConfig::parse(body.at("config"), options_.asset_dir);
    }
    catch (const SchemaError& e)
    {
      rethrow_under(e, "/config");
    }
    custom = std::make_unique<GraspPlanner>(config, cache_);
    planner = custom.get();
  }

  PlanOptions opts;
  opts.seed = seed;
  opts.jobs = jobs;
  opts.progress = [s = session.get()](const std::string& stage, double f) { s->set_progress(stage, f, true); };

  session->set_progress("generate", 0.0, true);
  PlanResult r;
  try
  {
    r = planner->plan(cur->task, session->robot, opts);
  }
  catch (...)
  {
    session->set_progress("failed", 0.0, false);
    throw;
  }
  session->set_progress("done", 1.0, false);

  if (top > 0 && r.candidates.size() > top)
  {
    r.candidates.resize(top);
  }
  SessionSnapshot next = without_result(*cur);
  next.result = std::move(r.candidates);
  next.result_revision = next.revision;
  session->publish(std::move(next));

  json out = grasps_json(*session->load());
  out["cache_hit"] = r.cache_hit;
  out["generated"] = r.generated;
  out["timings_ms"] = {{"generate", 1e3 * r.generate_seconds},
                       {"filter", 1e3 * r.filter_seconds},
                       {"evaluate", 1e3 * r.evaluate_seconds}};
  out["seed"] = seed;
  return out;
}

json GraspService::grasps(const std::string& id) const
{
  return grasps_json(*find(id)->load());
}

json GraspService::progress(const std::string& id) const
{
  const auto session = find(id);
  std::lock_guard lock(session->progress_mutex);
  return {{"stage", session->stage}, {"fraction", session->fraction}, {"running", session->running}};
}

json GraspService::select(const std::string& id, const json& body)
{
  object_body(body);
  const auto session = find(id);
  std::lock_guard writer(session->writer);
  const auto cur = session->load();
  check_revision(body, *cur);
  if (!cur->result)
  {
    throw ServiceError(409, "/index", "no current plan result; request grasps first");
  }
  if (!body.contains("index"))
  {
    throw SchemaError("/index", "missing required key");
  }
  const std::uint64_t index = read_count(body, "index", 0);
  if (index >= cur->result->size())
  {
    throw ServiceError(400, "/index",
                       "index " + std::to_string(index) + " out of range for " +
                         std::to_string(cur->result->size()) + " candidates");
  }

  SessionSnapshot next = *cur;
  next.selected = index;
  ++next.revision;
  const GraspCandidate& c = (*next.result)[index];
  json waypoints = json::array();
  for (const auto& step : next.task.steps)
  {
    waypoints.push_back(json_io::write_pose(tcp_world_pose(step.pose, c.grasp)));
  }
  session->publish(std::move(next));
  return {{"revision", cur->revision + 1}, {"selected", index}, {"waypoints", std::move(waypoints)}};
}

json GraspService::update_object(const std::string& id, const json& body)
{
  object_body(body);
  const auto session = find(id);
  std::lock_guard writer(session->writer);
  const auto cur = session->load();
  check_revision(body, *cur);

  const bool wrapped = body.contains("object");
  const json& doc = wrapped ? body.at("object") : body;
  const std::string path = wrapped ? "/object" : "";
  if (!doc.is_object())
  {
    throw SchemaError(path, "object must be an object");
  }
  ObjectInfo object = parse_object(doc, options_.asset_dir, path);
  if (!doc.contains("pose"))
  {
    object.pose = cur->task.object.pose;
  }

  SessionSnapshot next = without_result(*cur);
  next.task = graspforge::update_object(cur->task, object);
  session->publish(std::move(next));
  return state(id);
}

json GraspService::update_steps(const std::string& id, const json& body)
{
  object_body(body);
  const auto session = find(id);
  std::lock_guard writer(session->writer);
  const auto cur = session->load();
  check_revision(body, *cur);

  const json& steps = json_io::require(body, "steps", "");
  json doc = serialize_task(cur->task);
  doc["steps"] = steps;
  const json zeros = json::array({0.0, 0.0, 0.0});
  for (const char* key : {"tol_pos", "tol_rot"})
  {
    if (body.contains(key))
    {
      doc[key] = body.at(key);
    }
    else if (steps.is_array())
    {
      doc[key] = json(std::vector<json>(steps.size(), zeros));
    }
  }
  // geometry is taken over as is; only the step fields are re-validated
  doc["object"]["geometry"] = {{"type", "box"}, {"dimensions", {1.0, 1.0, 1.0}}};
  TaskDescription task = parse_task(doc, session->robot, options_.asset_dir);
  task.object = cur->task.object;

  SessionSnapshot next = without_result(*cur);
  next.task = std::move(task);
  session->publish(std::move(next));
  return state(id);
}

json GraspService::apply_roi(const std::string& id, const json& body)
{
  object_body(body);
  const auto session = find(id);
  std::lock_guard writer(session->writer);
  const auto cur = session->load();
  check_revision(body, *cur);

  const PointCloud cloud = parse_cloud_body(json_io::require(body, "cloud", ""), options_.max_cloud_points, "/cloud");
  const RoiBox box = parse_roi_box(json_io::require(body, "box", ""), "/box");
  const PointCloud cropped = crop_cloud(cloud, box);

  TriMesh hull;
  try
  {
    hull = reconstruct_mesh(cropped);
  }
  catch (const ReconstructionError& e)
  {
    throw ServiceError(422, "/box",
                       "cannot build a mesh from " + std::to_string(cropped.size()) + " points in the box: " + e.what(),
                       {{"points_in_box", cropped.size()}});
  }
  // object frame sits at the hull centroid, axes aligned with the world
  const Eigen::Vector3d c = hull.centroid();
  const ObjectInfo object = ObjectInfo::from_mesh(hull.transformed(Pose::translation(-c)), Pose::translation(c));

  SessionSnapshot next = without_result(*cur);
  next.task = graspforge::update_object(cur->task, object);
  next.roi = box;
  session->publish(std::move(next));

  json out = state(id);
  out["points_in_box"] = cropped.size();
  out["mesh"] = mesh_json(object.mesh);
  return out;
}

int GraspService::generator_invocations() const
{
  return planner_->generator_invocations();
}

}  // namespace graspforge
