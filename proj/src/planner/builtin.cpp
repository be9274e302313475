#include "graspforge/planner/builtin.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "graspforge/json_schema.hpp"
#include "graspforge/planner/metrics.hpp"
#include "graspforge/random.hpp"

namespace graspforge
{
namespace
{

void expect_object(const nlohmann::json& j, const std::string& path)
{
  if (!j.is_null() && !j.is_object())
  {
    throw SchemaError(path, "expected an object");
  }
}

double number_or(const nlohmann::json& j, const char* key, double fallback, const std::string& path)
{
  return j.is_object() && j.contains(key) ? json_io::read_number(j[key], json_io::child(path, key)) : fallback;
}

class SurfaceGenerator : public GraspGenerator
{
public:
  explicit SurfaceGenerator(SurfaceGeneratorParams p) : params_(p) {}
  std::string name() const override { return "surface"; }
  nlohmann::json params() const override { return params_.to_json(); }
  std::vector<Grasp> generate(const TriMesh& object, const EndEffectorModel& ee, const StageContext& ctx) const override
  {
    return generate_surface_grasps(object, ee, params_, ctx.seed, ctx.jobs);
  }

private:
  SurfaceGeneratorParams params_;
};

class AntipodalGenerator : public GraspGenerator
{
public:
  explicit AntipodalGenerator(AntipodalGeneratorParams p) : params_(p) {}
  std::string name() const override { return "antipodal"; }
  nlohmann::json params() const override { return params_.to_json(); }
  std::vector<Grasp> generate(const TriMesh& object, const EndEffectorModel& ee, const StageContext& ctx) const override
  {
    return generate_antipodal_grasps(object, ee, params_, ctx.seed, ctx.jobs);
  }

private:
  AntipodalGeneratorParams params_;
};

class ReachabilityFilter : public GraspFilter
{
public:
  explicit ReachabilityFilter(ReachabilityParams p) : params_(p) {}
  std::string name() const override { return "reachability"; }
  std::vector<GraspCandidate> filter(const std::vector<Grasp>& grasps, const TaskDescription& task, const Robot& robot,
                                     const StageContext& ctx) const override
  {
    return filter_reachable(grasps, task, robot, params_, ctx);
  }

private:
  ReachabilityParams params_;
};

class CombinedEvaluator : public GraspEvaluator
{
public:
  explicit CombinedEvaluator(CombinedParams p) : params_(p) {}
  std::string name() const override { return "combined"; }
  void evaluate(std::vector<GraspCandidate>& c, const TaskDescription& task, const Robot& robot,
                const StageContext& ctx) const override
  {
    evaluate_combined(c, task, robot, params_, ctx);
  }

private:
  CombinedParams params_;
};

class CapabilityEvaluator : public GraspEvaluator
{
public:
  explicit CapabilityEvaluator(CapabilityParams p) : params_(p) {}
  std::string name() const override { return "capability_index"; }
  void evaluate(std::vector<GraspCandidate>& c, const TaskDescription& task, const Robot& robot,
                const StageContext& ctx) const override
  {
    evaluate_capability(c, task, robot, params_, ctx);
  }

private:
  CapabilityParams params_;
};

// Serializes progress callbacks and reports roughly every 1%.
class ProgressReporter
{
public:
  ProgressReporter(const StageContext& ctx, std::string stage, std::size_t total)
    : ctx_(ctx), stage_(std::move(stage)), total_(total)
  {
    report(0);
  }

  void tick()
  {
    const std::size_t done = ++done_;
    if (ctx_.progress && (done == total_ || done % std::max<std::size_t>(1, total_ / 100) == 0))
    {
      report(done);
    }
  }

private:
  void report(std::size_t done)
  {
    if (!ctx_.progress)
    {
      return;
    }
    std::lock_guard<std::mutex> lock(mutex_);
    ctx_.progress(stage_, total_ == 0 ? 1.0 : double(done) / double(total_));
  }

  const StageContext& ctx_;
  std::string stage_;
  std::size_t total_;
  std::atomic<std::size_t> done_{0};
  std::mutex mutex_;
};

}  // namespace

ReachabilityParams ReachabilityParams::from_json(const nlohmann::json& j, const std::string& path)
{
  expect_object(j, path);
  ReachabilityParams p;
  p.ik.position_tolerance = number_or(j, "position_tolerance", p.ik.position_tolerance, path);
  p.ik.rotation_tolerance = number_or(j, "rotation_tolerance", p.ik.rotation_tolerance, path);
  p.ik.damping = number_or(j, "damping", p.ik.damping, path);
  p.ik.max_iterations = static_cast<int>(number_or(j, "max_iterations", p.ik.max_iterations, path));
  p.ik.max_restarts = static_cast<int>(number_or(j, "max_restarts", p.ik.max_restarts, path));
  if (!(p.ik.position_tolerance > 0) || !(p.ik.rotation_tolerance > 0) || !(p.ik.damping > 0) ||
      p.ik.max_iterations <= 0 || p.ik.max_restarts < 0)
  {
    throw SchemaError(path, "IK budgets and tolerances must be positive");
  }
  return p;
}

CombinedParams CombinedParams::from_json(const nlohmann::json& j, const std::string& path)
{
  expect_object(j, path);
  CombinedParams p;
  p.w_grasp = number_or(j, "w_grasp", p.w_grasp, path);
  p.w_kinematics = number_or(j, "w_kinematics", 1.0 - p.w_grasp, path);
  p.mu = number_or(j, "mu", p.mu, path);
  p.cone_edges = static_cast<int>(number_or(j, "cone_edges", p.cone_edges, path));
  if (p.w_grasp < 0 || p.w_kinematics < 0 || std::abs(p.w_grasp + p.w_kinematics - 1.0) > 1e-9)
  {
    throw SchemaError(path, "weights must be non-negative and sum to 1");
  }
  if (p.mu < 0 || p.cone_edges < 3)
  {
    throw SchemaError(path, "mu must be non-negative and cone_edges at least 3");
  }
  return p;
}

CapabilityParams CapabilityParams::from_json(const nlohmann::json& j, const std::string& path)
{
  expect_object(j, path);
  CapabilityParams p;
  p.characteristic_length = number_or(j, "characteristic_length", p.characteristic_length, path);
  if (!(p.characteristic_length > 0))
  {
    throw SchemaError(json_io::child(path, "characteristic_length"), "must be positive");
  }
  return p;
}

std::vector<GraspCandidate> filter_reachable(const std::vector<Grasp>& grasps, const TaskDescription& task,
                                             const Robot& robot, const ReachabilityParams& params,
                                             const StageContext& ctx)
{
  const EndEffectorModel& ee = robot.end_effector(task.ee_group);
  const Eigen::VectorXd start = robot.arm.positions(task.start_arm_config);
  ProgressReporter progress(ctx, "filter", grasps.size());

  std::vector<std::optional<GraspCandidate>> slots(grasps.size());
  parallel_for(grasps.size(), ctx.jobs, [&](std::size_t i) {
    const Grasp& g = grasps[i];
    const Pose grasp_offset = ee.tip_from_tcp(g.tcp_in_object);
    GraspCandidate c;
    c.grasp = g;
    c.gen_index = i;
    Eigen::VectorXd seed = start;
    bool ok = true;
    for (std::size_t k = 0; k < task.steps.size() && ok; ++k)
    {
      IkOptions opt = params.ik;
      opt.rng_seed = derive_seed(ctx.seed, i, k);
      const auto sol = solve_ik_toleranced(robot.arm, task.steps[k], grasp_offset, seed, opt);
      if (!sol)
      {
        ok = false;
        break;
      }
      c.per_step_status.push_back(sol->status);
      c.step_configs.push_back(sol->positions);
      seed = sol->positions;
    }
    if (ok)
    {
      slots[i] = std::move(c);
    }
    progress.tick();
  });

  std::vector<GraspCandidate> out;
  for (auto& s : slots)
  {
    if (s)
    {
      out.push_back(std::move(*s));
    }
  }
  return out;
}

void evaluate_combined(std::vector<GraspCandidate>& candidates, const TaskDescription& task, const Robot& robot,
                       const CombinedParams& params, const StageContext& ctx)
{
  const Eigen::Vector3d com = task.object.mesh.centroid();
  std::vector<double> eps(candidates.size(), 0.0);
  std::vector<double> manip(candidates.size(), 0.0);
  ProgressReporter progress(ctx, "evaluate", candidates.size());
  parallel_for(candidates.size(), ctx.jobs, [&](std::size_t i) {
    const GraspCandidate& c = candidates[i];
    if (!c.grasp.contacts.empty())
    {
      eps[i] = force_closure_epsilon(contact_set(c.grasp, com, params.mu), params.cone_edges);
    }
    double sum = 0.0;
    for (const auto& q : c.step_configs)
    {
      sum += manipulability(robot.arm, q);
    }
    manip[i] = c.step_configs.empty() ? 0.0 : sum / c.step_configs.size();
    progress.tick();
  });
  const double max_eps = eps.empty() ? 0.0 : *std::max_element(eps.begin(), eps.end());
  const double max_manip = manip.empty() ? 0.0 : *std::max_element(manip.begin(), manip.end());
  for (std::size_t i = 0; i < candidates.size(); ++i)
  {
    const double e = max_eps > 0.0 ? eps[i] / max_eps : 0.0;
    const double m = max_manip > 0.0 ? manip[i] / max_manip : 0.0;
    candidates[i].score = params.w_grasp * e + params.w_kinematics * m;
  }
}

void evaluate_capability(std::vector<GraspCandidate>& candidates, const TaskDescription& task, const Robot& robot,
                         const CapabilityParams& params, const StageContext& ctx)
{
  const EndEffectorModel& ee = robot.end_effector(task.ee_group);
  // TCP in the arm's tip frame
  const Pose tcp_in_tip = ee.mount * ee.tcp_offset;
  ProgressReporter progress(ctx, "evaluate", candidates.size());
  parallel_for(candidates.size(), ctx.jobs, [&](std::size_t i) {
    GraspCandidate& c = candidates[i];
    if (c.step_configs.empty())
    {
      c.score = 0.0;
    }
    else if (task.steps.size() == 1)
    {
      c.score = manipulability(robot.arm, c.step_configs[0]);
    }
    else
    {
      double score = 0.0;
      for (std::size_t k = 0; k + 1 < task.steps.size(); ++k)
      {
        score += capability_term(robot.arm, c.step_configs[k], tcp_in_tip,
                                 tcp_world_pose(task.steps[k].pose, c.grasp),
                                 tcp_world_pose(task.steps[k + 1].pose, c.grasp), params.characteristic_length);
      }
      c.score = score;
    }
    progress.tick();
  });
}

PluginRegistry PluginRegistry::with_builtins()
{
  PluginRegistry r;
  r.add_generator("surface", [](const nlohmann::json& p, const std::string& path) {
    return std::make_unique<SurfaceGenerator>(SurfaceGeneratorParams::from_json(p, path));
  });
  r.add_generator("antipodal", [](const nlohmann::json& p, const std::string& path) {
    return std::make_unique<AntipodalGenerator>(AntipodalGeneratorParams::from_json(p, path));
  });
  r.add_filter("reachability", [](const nlohmann::json& p, const std::string& path) {
    return std::make_unique<ReachabilityFilter>(ReachabilityParams::from_json(p, path));
  });
  r.add_evaluator("combined", [](const nlohmann::json& p, const std::string& path) {
    return std::make_unique<CombinedEvaluator>(CombinedParams::from_json(p, path));
  });
  r.add_evaluator("capability_index", [](const nlohmann::json& p, const std::string& path) {
    return std::make_unique<CapabilityEvaluator>(CapabilityParams::from_json(p, path));
  });
  return r;
}

namespace
{

template <typename T>
void add_unique(std::map<std::string, PluginRegistry::Factory<T>>& m, const std::string& kind,
                const std::string& name, PluginRegistry::Factory<T> f)
{
  if (!m.emplace(name, std::move(f)).second)
  {
    throw std::invalid_argument(kind + " plugin '" + name + "' is already registered");
  }
}

template <typename T>
std::unique_ptr<T> make(const std::map<std::string, PluginRegistry::Factory<T>>& m, const std::string& kind,
                        const std::string& name, const nlohmann::json& params, const std::string& path)
{
  auto it = m.find(name);
  if (it == m.end())
  {
    std::string known;
    for (const auto& [n, f] : m)
    {
      known += (known.empty() ? "" : ", ") + n;
    }
    throw UnknownPluginError("unknown " + kind + " plugin '" + name + "' (registered: " + known + ")");
  }
  return it->second(params, path);
}

template <typename M>
std::vector<std::string> names(const M& m)
{
  std::vector<std::string> out;
  for (const auto& [n, f] : m)
  {
    out.push_back(n);
  }
  return out;
}

}  // namespace

void PluginRegistry::add_generator(const std::string& name, Factory<GraspGenerator> f)
{
  add_unique(generators_, "generator", name, std::move(f));
}

void PluginRegistry::add_filter(const std::string& name, Factory<GraspFilter> f)
{
  add_unique(filters_, "filter", name, std::move(f));
}

void PluginRegistry::add_evaluator(const std::string& name, Factory<GraspEvaluator> f)
{
  add_unique(evaluators_, "evaluator", name, std::move(f));
}

std::unique_ptr<GraspGenerator> PluginRegistry::make_generator(const std::string& name, const nlohmann::json& params,
                                                               const std::string& path) const
{
  return make(generators_, "generator", name, params, path);
}

std::unique_ptr<GraspFilter> PluginRegistry::make_filter(const std::string& name, const nlohmann::json& params,
                                                         const std::string& path) const
{
  return make(filters_, "filter", name, params, path);
}

std::unique_ptr<GraspEvaluator> PluginRegistry::make_evaluator(const std::string& name, const nlohmann::json& params,
                                                               const std::string& path) const
{
  return make(evaluators_, "evaluator", name, params, path);
}

std::vector<std::string> PluginRegistry::generator_names() const
{
  return names(generators_);
}

std::vector<std::string> PluginRegistry::filter_names() const
{
  return names(filters_);
}

std::vector<std::string> PluginRegistry::evaluator_names() const
{
  return names(evaluators_);
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn)
{
  const std::size_t workers = std::min<std::size_t>(std::max(jobs, 1), n);
  if (workers <= 1)
  {
    for (std::size_t i = 0; i < n; ++i)
    {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
  {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++)
      {
        try
        {
          fn(i);
        }
        catch (...)
        {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error)
          {
            error = std::current_exception();
          }
          failed = true;
        }
      }
    });
  }
  for (auto& t : threads)
  {
    t.join();
  }
  if (error)
  {
    std::rethrow_exception(error);
  }
}

}  // namespace graspforge
