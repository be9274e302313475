#include "graspforge/planner/generators.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "graspforge/geometry/proximity.hpp"
#include "graspforge/geometry/sampling.hpp"
#include "graspforge/json_schema.hpp"

namespace graspforge
{
namespace
{

constexpr double kContactEpsilon = 1e-4;
constexpr int kMaxAdvanceIterations = 200;

int read_positive_int(const nlohmann::json& j, const char* key, int fallback, const std::string& path)
{
  if (!j.contains(key))
  {
    return fallback;
  }
  const auto& v = j[key];
  if (!v.is_number_integer() || v.get<long long>() <= 0)
  {
    throw SchemaError(json_io::child(path, key), "expected a positive integer");
  }
  return v.get<int>();
}

double read_double(const nlohmann::json& j, const char* key, double fallback, const std::string& path, bool allow_zero)
{
  if (!j.contains(key))
  {
    return fallback;
  }
  const double v = json_io::read_number(j[key], json_io::child(path, key));
  if (allow_zero ? v < 0.0 : v <= 0.0)
  {
    throw SchemaError(json_io::child(path, key), allow_zero ? "must be non-negative" : "must be positive");
  }
  return v;
}

void check_params_object(const nlohmann::json& j, const std::string& path)
{
  if (!j.is_null() && !j.is_object())
  {
    throw SchemaError(path, "expected an object");
  }
}

// Lowest clearance over every hand capsule at the open configuration.
double hand_clearance(const EndEffectorModel& ee, const Pose& palm, const std::vector<std::vector<Pose>>& open_frames,
                      const MeshProximity& object)
{
  double c = std::numeric_limits<double>::infinity();
  for (const auto& cap : ee.palm)
  {
    c = std::min(c, capsule_clearance(object, {palm * cap.p0, palm * cap.p1, cap.radius}, false));
  }
  for (std::size_t f = 0; f < ee.fingers.size(); ++f)
  {
    for (std::size_t k = 0; k < ee.fingers[f].links.size(); ++k)
    {
      const Pose t = palm * open_frames[f][k];
      const Capsule& cap = ee.fingers[f].links[k];
      c = std::min(c, capsule_clearance(object, {t * cap.p0, t * cap.p1, cap.radius}, false));
    }
  }
  return c;
}

bool has_opposing_pair(const std::vector<Contact>& contacts)
{
  for (std::size_t a = 0; a < contacts.size(); ++a)
  {
    for (std::size_t b = a + 1; b < contacts.size(); ++b)
    {
      const bool other_link = contacts[a].finger != contacts[b].finger || contacts[a].link != contacts[b].link;
      if (other_link && contacts[a].normal.dot(contacts[b].normal) < 0.0)
      {
        return true;
      }
    }
  }
  return false;
}

// Nearest exit of the ray origin + t * dir (t > min_t) through the surface.
std::optional<std::pair<Eigen::Vector3d, int>> ray_exit(const TriMesh& mesh, const Eigen::Vector3d& origin,
                                                       const Eigen::Vector3d& dir, double min_t)
{
  double best = std::numeric_limits<double>::infinity();
  int best_face = -1;
  for (std::size_t f = 0; f < mesh.num_faces(); ++f)
  {
    if (mesh.face_normals()[f].dot(dir) <= 0.0)
    {
      continue;  // entering or grazing faces
    }
    const Eigen::Vector3d a = mesh.vertex(f, 0);
    const Eigen::Vector3d e1 = mesh.vertex(f, 1) - a;
    const Eigen::Vector3d e2 = mesh.vertex(f, 2) - a;
    const Eigen::Vector3d p = dir.cross(e2);
    const double det = e1.dot(p);
    if (std::abs(det) < 1e-18)
    {
      continue;
    }
    const Eigen::Vector3d s = origin - a;
    const double u = s.dot(p) / det;
    const Eigen::Vector3d qv = s.cross(e1);
    const double v = dir.dot(qv) / det;
    const double t = e2.dot(qv) / det;
    const double tol = 1e-12;
    if (u < -tol || v < -tol || u + v > 1 + tol || t <= min_t || t >= best)
    {
      continue;
    }
    best = t;
    best_face = static_cast<int>(f);
  }
  if (best_face < 0)
  {
    return std::nullopt;
  }
  return std::make_pair(Eigen::Vector3d(origin + best * dir), best_face);
}

}  // namespace

SurfaceGeneratorParams SurfaceGeneratorParams::from_json(const nlohmann::json& j, const std::string& path)
{
  check_params_object(j, path);
  SurfaceGeneratorParams p;
  if (j.is_null())
  {
    return p;
  }
  p.n_samples = read_positive_int(j, "n_samples", p.n_samples, path);
  p.roll_count = read_positive_int(j, "roll_count", p.roll_count, path);
  p.standoff = read_double(j, "standoff", p.standoff, path, true);
  p.step_size = read_double(j, "step_size", p.step_size, path, false);
  return p;
}

nlohmann::json SurfaceGeneratorParams::to_json() const
{
  return {{"n_samples", n_samples}, {"roll_count", roll_count}, {"standoff", standoff}, {"step_size", step_size}};
}

AntipodalGeneratorParams AntipodalGeneratorParams::from_json(const nlohmann::json& j, const std::string& path)
{
  check_params_object(j, path);
  AntipodalGeneratorParams p;
  if (j.is_null())
  {
    return p;
  }
  p.n_pairs = read_positive_int(j, "n_pairs", p.n_pairs, path);
  p.mu = read_double(j, "mu", p.mu, path, true);
  p.approach_count = read_positive_int(j, "approach_count", p.approach_count, path);
  return p;
}

nlohmann::json AntipodalGeneratorParams::to_json() const
{
  return {{"n_pairs", n_pairs}, {"mu", mu}, {"approach_count", approach_count}};
}

Eigen::Quaterniond approach_frame(const Eigen::Vector3d& approach, double roll)
{
  const Eigen::Vector3d z = approach.normalized();
  int axis = 0;
  z.cwiseAbs().minCoeff(&axis);
  const Eigen::Vector3d e = Eigen::Vector3d::Unit(axis);
  const Eigen::Vector3d x = (e - e.dot(z) * z).normalized();
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = z.cross(x);
  r.col(2) = z;
  return Eigen::Quaterniond(r) * Eigen::Quaterniond(Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()));
}

bool inside_friction_cone(const Eigen::Vector3d& from, const Eigen::Vector3d& outward_normal,
                          const Eigen::Vector3d& to, double mu)
{
  const Eigen::Vector3d d = to - from;
  if (d.norm() < 1e-12)
  {
    return false;
  }
  const double c = std::clamp(d.normalized().dot(-outward_normal.normalized()), -1.0, 1.0);
  return std::acos(c) <= std::atan(mu) + 1e-6;
}

std::vector<Grasp> generate_surface_grasps(const TriMesh& object, const EndEffectorModel& ee,
                                           const SurfaceGeneratorParams& params, std::uint64_t seed, int jobs)
{
  if (params.n_samples <= 0 || params.roll_count <= 0 || params.standoff < 0.0 || params.step_size <= 0.0)
  {
    throw std::invalid_argument("surface generator parameters must be positive");
  }
  const MeshProximity prox(object);
  const auto samples = sample_surface(object, params.n_samples, seed);
  const auto open_frames = ee.link_frames(Pose::identity(), ee.open_config());
  const double start_distance = ee.reach_radius() + ee.tcp_offset.position.norm() + 0.01;
  ClosingOptions closing;
  closing.prismatic_step = params.step_size;
  closing.revolute_step = 10.0 * params.step_size;
  closing.contact_epsilon = kContactEpsilon;

  std::vector<std::vector<Grasp>> per_sample(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    const SurfaceSample& s = samples[i];
    for (int r = 0; r < params.roll_count; ++r)
    {
      const Eigen::Quaterniond rot = approach_frame(-s.normal, 2.0 * M_PI * r / params.roll_count);
      // advance the open hand along the approach axis until it first touches
      double d = start_distance;
      bool touched = false;
      for (int it = 0; it < kMaxAdvanceIterations && d > -start_distance; ++it)
      {
        const Pose palm = ee.palm_from_tcp(Pose(s.point + d * s.normal, rot));
        const double c = hand_clearance(ee, palm, open_frames, prox);
        if (c <= kContactEpsilon)
        {
          touched = it > 0;  // already touching at the start means the approach is blocked
          break;
        }
        d -= c;
      }
      if (!touched)
      {
        continue;
      }
      const Pose tcp(s.point + (d + params.standoff) * s.normal, rot);
      try
      {
        FingerClosure closure = close_fingers(ee, ee.palm_from_tcp(tcp), prox, closing);
        if (closure.touching_links() >= 2 && has_opposing_pair(closure.contacts))
        {
          per_sample[i].push_back({tcp, std::move(closure.finger_config), ee.name, std::move(closure.contacts)});
        }
      }
      catch (const PenetrationError&)
      {
      }
    }
  });

  std::vector<Grasp> out;
  for (auto& g : per_sample)
  {
    out.insert(out.end(), std::make_move_iterator(g.begin()), std::make_move_iterator(g.end()));
  }
  return out;
}

std::vector<Grasp> generate_antipodal_grasps(const TriMesh& object, const EndEffectorModel& ee,
                                             const AntipodalGeneratorParams& params, std::uint64_t seed, int jobs)
{
  if (ee.fingers.size() != 2)
  {
    throw std::invalid_argument("antipodal generator needs a two-finger gripper, '" + ee.name + "' has " +
                                std::to_string(ee.fingers.size()));
  }
  for (const auto& f : ee.fingers)
  {
    if (f.joints.size() != 1 || f.joints[0].type != JointType::prismatic)
    {
      throw std::invalid_argument("antipodal generator needs single-joint prismatic fingers");
    }
  }
  if (params.n_pairs <= 0 || params.mu < 0.0 || params.approach_count <= 0)
  {
    throw std::invalid_argument("antipodal generator parameters out of range");
  }

  const MeshProximity prox(object);
  const auto samples = sample_surface(object, params.n_pairs, seed);
  const double opening = ee.max_opening();
  // the fingers close along +-x of the palm; both move symmetrically
  const Eigen::Vector3d closing_axis = Eigen::Vector3d::UnitX();

  std::vector<std::vector<Grasp>> per_sample(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    const SurfaceSample& s = samples[i];
    const auto exit = ray_exit(object, s.point, -s.normal, 1e-9);
    if (!exit)
    {
      return;
    }
    const Eigen::Vector3d p2 = exit->first;
    const Eigen::Vector3d n2 = object.face_normals()[exit->second];
    const double width = (p2 - s.point).norm();
    if (width > opening || !inside_friction_cone(s.point, s.normal, p2, params.mu) ||
        !inside_friction_cone(p2, n2, s.point, params.mu))
    {
      return;
    }
    const Eigen::Vector3d x = (p2 - s.point).normalized();
    const Eigen::Vector3d mid = 0.5 * (s.point + p2);
    // frame with x along the line of centres; approaches rotate about it
    const Eigen::Quaterniond base = approach_frame(x, 0.0);
    const Eigen::Quaterniond to_x = Eigen::Quaterniond::FromTwoVectors(closing_axis, Eigen::Vector3d::UnitZ());
    for (int a = 0; a < params.approach_count; ++a)
    {
      const Eigen::Quaterniond roll(Eigen::AngleAxisd(2.0 * M_PI * a / params.approach_count, Eigen::Vector3d::UnitZ()));
      const Eigen::Quaterniond rot = base * roll * to_x;
      const Pose tcp(mid, rot);
      try
      {
        FingerClosure closure = close_fingers(ee, ee.palm_from_tcp(tcp), prox);
        if (closure.touching_links() >= 2)
        {
          per_sample[i].push_back({tcp, std::move(closure.finger_config), ee.name, std::move(closure.contacts)});
        }
      }
      catch (const PenetrationError&)
      {
      }
    }
  });

  std::vector<Grasp> out;
  for (auto& g : per_sample)
  {
    out.insert(out.end(), std::make_move_iterator(g.begin()), std::make_move_iterator(g.end()));
  }
  return out;
}

}  // namespace graspforge
