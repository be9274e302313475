#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graspforge/kinematics/ik.hpp"
#include "graspforge/task/task.hpp"

namespace graspforge
{

struct GraspCandidate
{
  Grasp grasp;
  std::vector<StepStatus> per_step_status;
  std::vector<Eigen::VectorXd> step_configs;  // arm configuration reached at each step
  double score = 0.0;
  std::size_t gen_index = 0;
};

/// Stage name and fraction complete in [0, 1]. Calls are serialized.
using ProgressFn = std::function<void(const std::string& stage, double fraction)>;

struct StageContext
{
  std::uint64_t seed = 0;
  int jobs = 1;
  ProgressFn progress;
};

class GraspGenerator
{
public:
  virtual ~GraspGenerator() = default;
  virtual std::string name() const = 0;
  /// Parameters as effective after defaults; part of the cache provenance.
  virtual nlohmann::json params() const = 0;
  /// Object-frame grasps for `object` (itself in the object frame).
  virtual std::vector<Grasp> generate(const TriMesh& object, const EndEffectorModel& ee,
                                      const StageContext& ctx) const = 0;
};

class GraspFilter
{
public:
  virtual ~GraspFilter() = default;
  virtual std::string name() const = 0;
  /// Survivors keep their index in `grasps` as gen_index.
  virtual std::vector<GraspCandidate> filter(const std::vector<Grasp>& grasps, const TaskDescription& task,
                                             const Robot& robot, const StageContext& ctx) const = 0;
};

class GraspEvaluator
{
public:
  virtual ~GraspEvaluator() = default;
  virtual std::string name() const = 0;
  /// Sets `score` on every candidate. Sees the whole batch so it can normalize.
  virtual void evaluate(std::vector<GraspCandidate>& candidates, const TaskDescription& task, const Robot& robot,
                        const StageContext& ctx) const = 0;
};

class UnknownPluginError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Factories take the plugin's `params` object and the JSON path it came from.
class PluginRegistry
{
public:
  template <typename T>
  using Factory = std::function<std::unique_ptr<T>(const nlohmann::json& params, const std::string& path)>;

  /// Registry preloaded with surface/antipodal, reachability and combined/capability_index.
  static PluginRegistry with_builtins();

  /// Throws std::invalid_argument when the name is already taken for that kind.
  void add_generator(const std::string& name, Factory<GraspGenerator> factory);
  void add_filter(const std::string& name, Factory<GraspFilter> factory);
  void add_evaluator(const std::string& name, Factory<GraspEvaluator> factory);

  /// Throw UnknownPluginError for unregistered names.
  std::unique_ptr<GraspGenerator> make_generator(const std::string& name, const nlohmann::json& params,
                                                 const std::string& path = "/generator/params") const;
  std::unique_ptr<GraspFilter> make_filter(const std::string& name, const nlohmann::json& params,
                                           const std::string& path = "/filter/params") const;
  std::unique_ptr<GraspEvaluator> make_evaluator(const std::string& name, const nlohmann::json& params,
                                                 const std::string& path = "/evaluator/params") const;

  std::vector<std::string> generator_names() const;
  std::vector<std::string> filter_names() const;
  std::vector<std::string> evaluator_names() const;

private:
  std::map<std::string, Factory<GraspGenerator>> generators_;
  std::map<std::string, Factory<GraspFilter>> filters_;
  std::map<std::string, Factory<GraspEvaluator>> evaluators_;
};

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Each index runs exactly once;
/// the first exception is rethrown after all workers stop.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace graspforge
