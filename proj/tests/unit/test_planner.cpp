#include <atomic>
#include <map>

#include <gtest/gtest.h>

#include "builders.hpp"
#include "graspforge/geometry/primitives.hpp"
#include "graspforge/planner/builtin.hpp"
#include "graspforge/planner/planner.hpp"

using namespace graspforge;
using namespace graspforge::testing;

namespace
{

struct Counters
{
  std::atomic<int> generate{0};
  std::atomic<int> filter{0};
  std::atomic<int> evaluate{0};
};

/// Emits `count` tcp offsets along -x, so grasp i puts the scara tip i cm
/// closer to the base.
class LineGenerator : public GraspGenerator
{
public:
  LineGenerator(Counters& c, int count) : c_(c), count_(count) {}
  std::string name() const override { return "line"; }
  nlohmann::json params() const override { return {{"count", count_}}; }
  std::vector<Grasp> generate(const TriMesh&, const EndEffectorModel& ee, const StageContext&) const override
  {
    ++c_.generate;
    std::vector<Grasp> out;
    for (int i = 0; i < count_; ++i)
    {
      out.push_back({Pose::translation(Eigen::Vector3d(-0.01 * i, 0, 0)), ee.open_config(), ee.name, {}});
    }
    return out;
  }

private:
  Counters& c_;
  int count_;
};

class CountingFilter : public GraspFilter
{
public:
  explicit CountingFilter(Counters& c) : c_(c) {}
  std::string name() const override { return "counting"; }
  std::vector<GraspCandidate> filter(const std::vector<Grasp>& grasps, const TaskDescription& task,
                                     const Robot& robot, const StageContext& ctx) const override
  {
    ++c_.filter;
    return filter_reachable(grasps, task, robot, {}, ctx);
  }

private:
  Counters& c_;
};

/// Scores repeat with period 3 so ties must fall back to generation order.
class ModuloEvaluator : public GraspEvaluator
{
public:
  explicit ModuloEvaluator(Counters& c) : c_(c) {}
  std::string name() const override { return "modulo"; }
  void evaluate(std::vector<GraspCandidate>& cands, const TaskDescription&, const Robot&,
                const StageContext&) const override
  {
    ++c_.evaluate;
    for (auto& c : cands)
    {
      c.score = static_cast<double>(c.gen_index % 3);
    }
  }

private:
  Counters& c_;
};

PluginRegistry stub_registry(Counters& c, int count = 6)
{
  PluginRegistry r;
  r.add_generator("line", [&c, count](const nlohmann::json&, const std::string&) {
    return std::make_unique<LineGenerator>(c, count);
  });
  r.add_filter("counting", [&c](const nlohmann::json&, const std::string&) {
    return std::make_unique<CountingFilter>(c);
  });
  r.add_evaluator("modulo", [&c](const nlohmann::json&, const std::string&) {
    return std::make_unique<ModuloEvaluator>(c);
  });
  return r;
}

PlannerConfig stub_config()
{
  PlannerConfig cfg;
  cfg.generator.name = "line";
  cfg.filter.name = "counting";
  cfg.evaluator.name = "modulo";
  return cfg;
}

TaskDescription reachable_task(const Robot& robot, double size = 0.04)
{
  TolerancedStep a;
  a.pose = Pose::translation(Eigen::Vector3d(1.8, 0.4, 0.0));
  TolerancedStep b;
  b.pose = Pose::translation(Eigen::Vector3d(1.2, 1.2, 0.1));
  return single_object_task(robot, make_box(Eigen::Vector3d::Constant(size)), {a, b});
}

std::filesystem::path fresh_dir(const std::string& name)
{
  const auto dir = std::filesystem::temp_directory_path() / ("graspforge_planner_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(PlannerConfig, DefaultsAndOverrides)
{
  const PlannerConfig d = PlannerConfig::parse(nlohmann::json::object());
  EXPECT_EQ(d.generator.name, "surface");
  EXPECT_EQ(d.filter.name, "reachability");
  EXPECT_EQ(d.evaluator.name, "combined");
  EXPECT_EQ(d.cache_mode, GraspCache::Mode::memory);

  const PlannerConfig c = PlannerConfig::parse(
      {{"generator", {{"name", "antipodal"}, {"params", {{"n_pairs", 5}}}}}, {"cache", {{"mode", "disk"}, {"dir", "c"}}}},
      "/base");
  EXPECT_EQ(c.generator.name, "antipodal");
  EXPECT_EQ(c.generator.params["n_pairs"], 5);
  EXPECT_EQ(c.cache_dir, std::filesystem::path("/base/c"));
  EXPECT_EQ(PlannerConfig::parse(c.to_json()).to_json(), c.to_json());
}

TEST(PlannerConfig, ErrorsNameTheKey)
{
  auto path_of = [](const nlohmann::json& doc) {
    try
    {
      PlannerConfig::parse(doc);
    }
    catch (const SchemaError& e)
    {
      return e.path();
    }
    return std::string("<no error>");
  };
  EXPECT_EQ(path_of({{"cache", {{"mode", "cloud"}}}}), "/cache/mode");
  EXPECT_EQ(path_of({{"cache", {{"mode", "disk"}}}}), "/cache/dir");
  EXPECT_EQ(path_of({{"generator", {{"params", 3}}}}), "/generator/params");
  EXPECT_EQ(path_of({{"evaluator", "combined"}}), "/evaluator");
  EXPECT_THROW(PlannerConfig::load("/nonexistent/planner.json"), std::runtime_error);
}

TEST(GraspPlanner, UnknownPluginFailsAtConstruction)
{
  PlannerConfig cfg;
  cfg.evaluator.name = "learned";
  EXPECT_THROW(GraspPlanner{cfg}, UnknownPluginError);
  cfg = PlannerConfig{};
  cfg.generator.params = {{"n_samples", 0}};
  EXPECT_THROW(GraspPlanner{cfg}, SchemaError);
}

TEST(GraspPlanner, GeneratorRunsOncePerObjectWhileLaterStagesRerun)
{
  Counters n;
  GraspPlanner planner(stub_config(), stub_registry(n));
  const Robot robot = scara_robot();
  const TaskDescription task = reachable_task(robot);
  const PlanResult first = planner.plan(task, robot, {5, 1, {}});
  const PlanResult second = planner.plan(task, robot, {5, 1, {}});
  EXPECT_EQ(planner.generator_invocations(), 1);
  EXPECT_EQ(n.generate.load(), 1);
  EXPECT_EQ(n.filter.load(), 2);
  EXPECT_EQ(n.evaluate.load(), 2);
  EXPECT_FALSE(first.cache_hit);
  EXPECT_TRUE(second.cache_hit);
  EXPECT_EQ(serialize_candidates(first.candidates).dump(), serialize_candidates(second.candidates).dump());

  // a new object digest is a new key
  planner.plan(update_object(task, ObjectInfo::from_mesh(make_box(Eigen::Vector3d::Constant(0.05)))), robot,
               {5, 1, {}});
  EXPECT_EQ(planner.generator_invocations(), 2);
  // moving the object keeps the digest and the cached grasps
  TaskDescription moved = task;
  moved.object.pose = Pose::translation(Eigen::Vector3d(0.3, 0, 0));
  EXPECT_TRUE(planner.plan(moved, robot, {5, 1, {}}).cache_hit);
}

TEST(GraspPlanner, DifferentSeedRegeneratesAndReportsTheOverwrite)
{
  Counters n;
  GraspPlanner planner(stub_config(), stub_registry(n));
  const Robot robot = scara_robot();
  const TaskDescription task = reachable_task(robot);
  planner.plan(task, robot, {1, 1, {}});
  const PlanResult r = planner.plan(task, robot, {2, 1, {}});
  EXPECT_FALSE(r.cache_hit);
  EXPECT_TRUE(r.cache_overwritten);
  EXPECT_EQ(planner.generator_invocations(), 2);
  EXPECT_FALSE(planner.cache().warnings().empty());
}

TEST(GraspPlanner, DiskCacheSurvivesANewPlanner)
{
  const auto dir = fresh_dir("disk");
  Counters n;
  PlannerConfig cfg = stub_config();
  cfg.cache_mode = GraspCache::Mode::disk;
  cfg.cache_dir = dir;
  const Robot robot = scara_robot();
  const TaskDescription task = reachable_task(robot);
  {
    GraspPlanner first(cfg, stub_registry(n));
    first.plan(task, robot, {3, 1, {}});
  }
  GraspPlanner second(cfg, stub_registry(n));
  const PlanResult r = second.plan(task, robot, {3, 1, {}});
  EXPECT_TRUE(r.cache_hit);
  EXPECT_EQ(second.generator_invocations(), 0);
  EXPECT_EQ(n.generate.load(), 1);
  EXPECT_EQ(second.cache().list().size(), 1u);
}

TEST(GraspPlanner, SharedCacheIsReused)
{
  Counters n;
  auto cache = std::make_shared<GraspCache>(GraspCache::in_memory());
  const Robot robot = scara_robot();
  const TaskDescription task = reachable_task(robot);
  GraspPlanner(stub_config(), cache, stub_registry(n)).plan(task, robot, {3, 1, {}});
  GraspPlanner(stub_config(), cache, stub_registry(n)).plan(task, robot, {3, 1, {}});
  EXPECT_EQ(n.generate.load(), 1);
}

TEST(GraspPlanner, RanksByScoreThenGenerationOrder)
{
  Counters n;
  GraspPlanner planner(stub_config(), stub_registry(n, 9));
  const Robot robot = scara_robot();
  const PlanResult r = planner.plan(reachable_task(robot), robot, {3, 1, {}});
  ASSERT_EQ(r.candidates.size(), 9u);
  std::vector<std::size_t> order;
  for (const auto& c : r.candidates)
  {
    order.push_back(c.gen_index);
  }
  EXPECT_EQ(order, (std::vector<std::size_t>{2, 5, 8, 1, 4, 7, 0, 3, 6}));
}

TEST(RankCandidates, SortedAndStableOnRandomBatches)
{
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial)
  {
    std::vector<GraspCandidate> c(1 + static_cast<int>(rng.uniform(0, 40)));
    for (std::size_t i = 0; i < c.size(); ++i)
    {
      c[i].gen_index = i;
      c[i].score = std::floor(rng.uniform(0, 4));  // plenty of ties
    }
    // shuffle so the input order is not generation order
    for (std::size_t i = c.size(); i > 1; --i)
    {
      std::swap(c[i - 1], c[static_cast<std::size_t>(rng.uniform(0, 1) * i) % i]);
    }
    rank_candidates(c);
    for (std::size_t i = 1; i < c.size(); ++i)
    {
      EXPECT_TRUE(c[i - 1].score > c[i].score ||
                  (c[i - 1].score == c[i].score && c[i - 1].gen_index < c[i].gen_index));
    }
  }
}

TEST(GraspPlanner, EmptyResultIsNotAnError)
{
  Counters n;
  GraspPlanner planner(stub_config(), stub_registry(n));
  const Robot robot = scara_robot();
  TaskDescription task = reachable_task(robot);
  task.steps[1].pose = Pose::translation(Eigen::Vector3d(5, 0, 0));
  const PlanResult r = planner.plan(task, robot, {3, 1, {}});
  EXPECT_TRUE(r.candidates.empty());
  EXPECT_EQ(r.generated, 6u);
  EXPECT_EQ(serialize_candidates(r.candidates)["grasps"].size(), 0u);
}

TEST(GraspPlanner, ProgressIsMonotonePerStage)
{
  Counters n;
  GraspPlanner planner(stub_config(), stub_registry(n));
  const Robot robot = scara_robot();
  std::vector<std::pair<std::string, double>> events;
  planner.plan(reachable_task(robot), robot,
               {3, 2, [&](const std::string& s, double f) { events.emplace_back(s, f); }});
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.front().first, "generate");
  EXPECT_EQ(events.back(), (std::pair<std::string, double>{"done", 1.0}));
  std::map<std::string, double> last;
  for (const auto& [stage, f] : events)
  {
    EXPECT_GE(f, last[stage]);
    EXPECT_LE(f, 1.0);
    last[stage] = f;
  }
}

TEST(SerializeCandidates, MatchesTheGraspListFormat)
{
  GraspCandidate c;
  c.grasp.ee_name = "gripper";
  c.grasp.tcp_in_object = Pose::translation(Eigen::Vector3d(0, 0, 0.1));
  c.grasp.finger_config = {{"finger_left", 0.02}};
  c.grasp.contacts.push_back({});
  c.per_step_status = {StepStatus::exact, StepStatus::tolerance_only};
  c.step_configs = {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(2)};
  c.score = 0.75;
  const auto j = serialize_candidates({c, c, c}, 2);
  ASSERT_EQ(j["grasps"].size(), 2u);
  const auto& g = j["grasps"][0];
  EXPECT_EQ(g["ee_name"], "gripper");
  EXPECT_EQ(g["score"], 0.75);
  EXPECT_TRUE(g.contains("tcp_in_object"));
  EXPECT_TRUE(g["tcp_in_object"].contains("quat"));
  EXPECT_EQ(g["finger_config"]["finger_left"], 0.02);
  EXPECT_FALSE(g.contains("contacts"));
  ASSERT_EQ(g["per_step"].size(), 2u);
  EXPECT_EQ(g["per_step"][0]["status"], "exact");
  EXPECT_EQ(g["per_step"][1]["status"], "tolerance_only");
  EXPECT_EQ(serialize_candidates({c, c, c})["grasps"].size(), 3u);
}

TEST(GraspPlanner, BuiltinPipelineIsIndependentOfJobCount)
{
  PlannerConfig cfg;
  cfg.generator.params = {{"n_samples", 30}, {"roll_count", 4}};
  const Robot robot = load_robot(fixture("robots/ref6.json"));
  const TaskDescription task = load_task(fixture("tasks/cube.json"), robot);
  const PlanResult a = GraspPlanner(cfg).plan(task, robot, {7, 1, {}});
  const PlanResult b = GraspPlanner(cfg).plan(task, robot, {7, 3, {}});
  ASSERT_FALSE(a.candidates.empty());
  EXPECT_EQ(serialize_candidates(a.candidates).dump(), serialize_candidates(b.candidates).dump());
}
