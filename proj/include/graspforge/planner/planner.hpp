#pragma once

#include <atomic>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graspforge/planner/cache.hpp"
#include "graspforge/planner/plugins.hpp"

namespace graspforge
{

struct PluginSpec
{
  std::string name;
  nlohmann::json params = nlohmann::json::object();
};

struct PlannerConfig
{
  PluginSpec generator{"surface"};
  PluginSpec filter{"reachability"};
  PluginSpec evaluator{"combined"};
  GraspCache::Mode cache_mode = GraspCache::Mode::memory;
  std::filesystem::path cache_dir;  // required in disk mode; relative paths resolve against the config file

  /// Every section is optional. Throws SchemaError with the offending path.
  static PlannerConfig parse(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
  static PlannerConfig load(const std::string& path);
  nlohmann::json to_json() const;
};

struct PlanOptions
{
  std::uint64_t seed = 0;
  int jobs = 1;
  ProgressFn progress;
};

struct PlanResult
{
  std::vector<GraspCandidate> candidates;  // best first
  std::size_t generated = 0;               // grasps entering the filter
  bool cache_hit = false;
  bool cache_overwritten = false;
  double generate_seconds = 0.0;
  double filter_seconds = 0.0;
  double evaluate_seconds = 0.0;
};

/// Generator -> filter -> evaluator. Generator output is cached per (hand,
/// object digest); filter and evaluator run on every call.
class GraspPlanner
{
public:
  /// Throws UnknownPluginError or SchemaError for a bad configuration.
  explicit GraspPlanner(const PlannerConfig& config, const PluginRegistry& registry = PluginRegistry::with_builtins());
  /// Uses an externally owned cache instead of one built from the config.
  GraspPlanner(const PlannerConfig& config, std::shared_ptr<GraspCache> cache,
               const PluginRegistry& registry = PluginRegistry::with_builtins());

  PlanResult plan(const TaskDescription& task, const Robot& robot, const PlanOptions& options = {});

  /// Number of times the generator actually ran.
  int generator_invocations() const { return generator_calls_.load(); }

  GraspCache& cache() { return *cache_; }
  const PlannerConfig& config() const { return config_; }

private:
  PlannerConfig config_;
  std::unique_ptr<GraspGenerator> generator_;
  std::unique_ptr<GraspFilter> filter_;
  std::unique_ptr<GraspEvaluator> evaluator_;
  std::shared_ptr<GraspCache> cache_;
  std::atomic<int> generator_calls_{0};
};

/// Score descending, then gen_index ascending.
void rank_candidates(std::vector<GraspCandidate>& candidates);

const char* to_string(StepStatus status);

/// {grasps:[{tcp_in_object, finger_config, ee_name, score, per_step:[{status}]}]};
/// `top` = 0 keeps every candidate.
nlohmann::json serialize_candidates(const std::vector<GraspCandidate>& candidates, std::size_t top = 0);

}  // namespace graspforge
