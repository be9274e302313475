#include "graspforge/planner/planner.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>

#include "graspforge/json_schema.hpp"
#include "graspforge/random.hpp"

namespace graspforge
{
namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t)
{
  return std::chrono::duration<double>(Clock::now() - t).count();
}

PluginSpec read_spec(const nlohmann::json& doc, const std::string& key, const std::string& fallback)
{
  PluginSpec spec{fallback};
  if (!doc.contains(key))
  {
    return spec;
  }
  const std::string path = "/" + key;
  const auto& j = doc[key];
  if (!j.is_object())
  {
    throw SchemaError(path, "expected {name, params}");
  }
  if (j.contains("name"))
  {
    spec.name = json_io::read_string(j, "name", path);
  }
  if (j.contains("params"))
  {
    if (!j["params"].is_object())
    {
      throw SchemaError(json_io::child(path, "params"), "expected an object");
    }
    spec.params = j["params"];
  }
  return spec;
}

std::shared_ptr<GraspCache> make_cache(const PlannerConfig& c)
{
  if (c.cache_mode == GraspCache::Mode::disk)
  {
    return std::make_shared<GraspCache>(GraspCache::on_disk(c.cache_dir));
  }
  return std::make_shared<GraspCache>(GraspCache::in_memory());
}

}  // namespace

PlannerConfig PlannerConfig::parse(const nlohmann::json& doc, const std::filesystem::path& base_dir)
{
  if (!doc.is_object())
  {
    throw SchemaError("/", "planner config must be a JSON object");
  }
  PlannerConfig c;
  c.generator = read_spec(doc, "generator", "surface");
  c.filter = read_spec(doc, "filter", "reachability");
  c.evaluator = read_spec(doc, "evaluator", "combined");
  if (doc.contains("cache"))
  {
    const auto& cache = doc["cache"];
    if (!cache.is_object())
    {
      throw SchemaError("/cache", "expected {mode, dir}");
    }
    const std::string mode = cache.value("mode", "memory");
    if (mode == "memory")
    {
      c.cache_mode = GraspCache::Mode::memory;
    }
    else if (mode == "disk")
    {
      c.cache_mode = GraspCache::Mode::disk;
      std::filesystem::path dir = json_io::read_string(cache, "dir", "/cache");
      c.cache_dir = dir.is_relative() && !base_dir.empty() ? base_dir / dir : dir;
    }
    else
    {
      throw SchemaError("/cache/mode", "expected \"memory\" or \"disk\"");
    }
  }
  return c;
}

PlannerConfig PlannerConfig::load(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
  {
    throw std::runtime_error("cannot open planner config '" + path + "'");
  }
  nlohmann::json doc;
  try
  {
    doc = nlohmann::json::parse(in);
  }
  catch (const nlohmann::json::parse_error& e)
  {
    throw SchemaError("/", std::string("planner config is not valid JSON: ") + e.what());
  }
  return parse(doc, std::filesystem::path(path).parent_path());
}

nlohmann::json PlannerConfig::to_json() const
{
  nlohmann::json cache{{"mode", cache_mode == GraspCache::Mode::disk ? "disk" : "memory"}};
  if (cache_mode == GraspCache::Mode::disk)
  {
    cache["dir"] = cache_dir.string();
  }
  return {{"generator", {{"name", generator.name}, {"params", generator.params}}},
          {"filter", {{"name", filter.name}, {"params", filter.params}}},
          {"evaluator", {{"name", evaluator.name}, {"params", evaluator.params}}},
          {"cache", std::move(cache)}};
}

GraspPlanner::GraspPlanner(const PlannerConfig& config, const PluginRegistry& registry)
  : GraspPlanner(config, make_cache(config), registry)
{
}

GraspPlanner::GraspPlanner(const PlannerConfig& config, std::shared_ptr<GraspCache> cache,
                           const PluginRegistry& registry)
  : config_(config),
    generator_(registry.make_generator(config.generator.name, config.generator.params)),
    filter_(registry.make_filter(config.filter.name, config.filter.params)),
    evaluator_(registry.make_evaluator(config.evaluator.name, config.evaluator.params)),
    cache_(std::move(cache))
{
}

PlanResult GraspPlanner::plan(const TaskDescription& task, const Robot& robot, const PlanOptions& options)
{
  const EndEffectorModel& ee = robot.end_effector(task.ee_group);
  PlanResult result;
  auto report = [&](const char* stage, double f) {
    if (options.progress)
    {
      options.progress(stage, f);
    }
  };

  StageContext gen_ctx{derive_seed(options.seed, 0x9e4e), options.jobs, options.progress};
  const CacheKey key{ee.name, task.object.digest};
  const Provenance provenance = Provenance::of(generator_->name(), generator_->params(), gen_ctx.seed);

  auto t0 = Clock::now();
  report("generate", 0.0);
  std::vector<Grasp> grasps;
  if (auto hit = cache_->get(key, provenance))
  {
    grasps = std::move(*hit);
    result.cache_hit = true;
  }
  else
  {
    ++generator_calls_;
    grasps = generator_->generate(task.object.mesh, ee, gen_ctx);
    result.cache_overwritten = cache_->put(key, {provenance, grasps});
  }
  report("generate", 1.0);
  result.generated = grasps.size();
  result.generate_seconds = seconds_since(t0);

  StageContext ctx{derive_seed(options.seed, 0xf117), options.jobs, options.progress};
  t0 = Clock::now();
  result.candidates = filter_->filter(grasps, task, robot, ctx);
  result.filter_seconds = seconds_since(t0);

  t0 = Clock::now();
  evaluator_->evaluate(result.candidates, task, robot, ctx);
  rank_candidates(result.candidates);
  result.evaluate_seconds = seconds_since(t0);
  report("done", 1.0);
  return result;
}

void rank_candidates(std::vector<GraspCandidate>& candidates)
{
  std::stable_sort(candidates.begin(), candidates.end(), [](const GraspCandidate& a, const GraspCandidate& b) {
    if (a.score != b.score)
    {
      return a.score > b.score;
    }
    return a.gen_index < b.gen_index;
  });
}

const char* to_string(StepStatus status)
{
  return status == StepStatus::exact ? "exact" : "tolerance_only";
}

nlohmann::json serialize_candidates(const std::vector<GraspCandidate>& candidates, std::size_t top)
{
  nlohmann::json grasps = nlohmann::json::array();
  const std::size_t n = top == 0 ? candidates.size() : std::min(top, candidates.size());
  for (std::size_t i = 0; i < n; ++i)
  {
    const GraspCandidate& c = candidates[i];
    nlohmann::json g = serialize_grasp(c.grasp);
    g.erase("contacts");
    g["score"] = c.score;
    g["gen_index"] = c.gen_index;
    nlohmann::json steps = nlohmann::json::array();
    for (std::size_t k = 0; k < c.per_step_status.size(); ++k)
    {
      nlohmann::json s{{"status", to_string(c.per_step_status[k])}};
      if (k < c.step_configs.size())
      {
        s["arm_config"] = std::vector<double>(c.step_configs[k].data(),
                                              c.step_configs[k].data() + c.step_configs[k].size());
      }
      steps.push_back(std::move(s));
    }
    g["per_step"] = std::move(steps);
    grasps.push_back(std::move(g));
  }
  return {{"grasps", std::move(grasps)}};
}

}  // namespace graspforge
