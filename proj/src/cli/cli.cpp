#include "graspforge/cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "graspforge/planner/builtin.hpp"
#include "graspforge/planner/planner.hpp"
#include "graspforge/random.hpp"
#include "graspforge/service/http.hpp"
#include "graspforge/service/service.hpp"

namespace graspforge
{

using nlohmann::json;
namespace fs = std::filesystem;

namespace
{

// Input that cannot be read at all, as opposed to input that reads but is wrong.
class FileError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

void require_file(const std::string& what, const std::string& path)
{
  if (!fs::is_regular_file(path))
  {
    throw FileError(what + " '" + path + "' does not exist or is not a file");
  }
}

PlannerConfig load_config(const std::string& path, const std::string& cache_dir)
{
  PlannerConfig config;
  if (!path.empty())
  {
    require_file("planner config", path);
    config = PlannerConfig::load(path);
  }
  if (!cache_dir.empty())
  {
    config.cache_mode = GraspCache::Mode::disk;
    config.cache_dir = cache_dir;
  }
  return config;
}

// Maps the error families to their messages; every one of them exits 1.
template <class F>
int guarded(std::ostream& err, F&& body)
{
  try
  {
    return body();
  }
  catch (const FileError& e)
  {
    err << "file error: " << e.what() << "\n";
  }
  catch (const SchemaError& e)
  {
    err << "schema error at " << (e.path().empty() ? "/" : e.path()) << ": " << e.what() << "\n";
  }
  catch (const UnknownPluginError& e)
  {
    err << "plugin error: " << e.what() << "\n";
  }
  catch (const std::exception& e)
  {
    err << "error: " << e.what() << "\n";
  }
  return exit_error;
}

std::string statuses(const GraspCandidate& c)
{
  std::string s;
  for (std::size_t k = 0; k < c.per_step_status.size(); ++k)
  {
    s += (k ? " " : "") + std::string(to_string(c.per_step_status[k]));
  }
  return s;
}

std::string format_score(double v)
{
  std::ostringstream os;
  os << std::fixed << std::setprecision(6) << v;
  return os.str();
}

void write_table(std::ostream& os, const std::vector<GraspCandidate>& cands, std::size_t n, bool tsv)
{
  if (tsv)
  {
    os << "rank\tscore\tgen_index\tstatuses\n";
    for (std::size_t i = 0; i < n; ++i)
    {
      os << i << "\t" << format_score(cands[i].score) << "\t" << cands[i].gen_index << "\t" << statuses(cands[i]) << "\n";
    }
    return;
  }
  os << std::left << std::setw(6) << "rank" << std::setw(12) << "score" << "statuses\n";
  for (std::size_t i = 0; i < n; ++i)
  {
    os << std::left << std::setw(6) << i << std::setw(12) << format_score(cands[i].score) << statuses(cands[i]) << "\n";
  }
}

struct PlanArgs
{
  std::string robot;
  std::string task;
  std::string config;
  std::string out;
  std::string cache_dir;
  std::size_t top = 10;
  std::uint64_t seed = 0;
  int jobs = 1;
};

int cmd_plan(const PlanArgs& a, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    require_file("robot description", a.robot);
    require_file("task file", a.task);
    const PlannerConfig config = load_config(a.config, a.cache_dir);
    const Robot robot = load_robot(a.robot);
    const TaskDescription task = load_task(a.task, robot);

    GraspPlanner planner(config);
    PlanOptions opts;
    opts.seed = a.seed;
    opts.jobs = std::max(1, a.jobs);
    const PlanResult r = planner.plan(task, robot, opts);

    const std::size_t n = a.top == 0 ? r.candidates.size() : std::min(a.top, r.candidates.size());
    if (!a.out.empty())
    {
      std::ofstream file(a.out, std::ios::binary);
      if (!file)
      {
        throw FileError("cannot write '" + a.out + "'");
      }
      if (fs::path(a.out).extension() == ".tsv")
      {
        write_table(file, r.candidates, n, true);
      }
      else
      {
        file << serialize_candidates(r.candidates, n).dump(1) << "\n";
      }
    }

    write_table(out, r.candidates, n, false);
    out << r.candidates.size() << " candidates (showing " << n << "; generated " << r.generated << "; cache "
        << (r.cache_hit ? "hit" : "miss") << ")\n";
    out << std::fixed << std::setprecision(1) << "timings ms: generate " << 1e3 * r.generate_seconds << "  filter "
        << 1e3 * r.filter_seconds << "  evaluate " << 1e3 * r.evaluate_seconds << "\n";
    out << "seed " << a.seed << " (generator stream " << derive_seed(a.seed, 0x9e4e) << ", filter/evaluator stream "
        << derive_seed(a.seed, 0xf117) << ")\n";
    return r.candidates.empty() ? exit_empty : exit_ok;
  });
}

std::optional<GraspCache> open_existing_cache(const std::string& dir)
{
  if (dir.empty())
  {
    throw FileError("no cache directory; pass --cache-dir or set GRASPFORGE_CACHE_DIR");
  }
  if (!fs::is_directory(dir))
  {
    return std::nullopt;
  }
  return GraspCache::on_disk(dir);
}

int cmd_cache_list(const std::string& dir, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    auto cache = open_existing_cache(dir);
    if (!cache)
    {
      throw FileError("cache directory '" + dir + "' does not exist");
    }
    const auto entries = cache->list();
    for (const auto& l : entries)
    {
      out << l.key.str() << "\t" << l.grasp_count << " grasps\t" << l.provenance.generator << "\n";
    }
    out << entries.size() << (entries.size() == 1 ? " entry" : " entries") << "\n";
    for (const auto& w : cache->warnings())
    {
      err << "warning: " << w << "\n";
    }
    return exit_ok;
  });
}

int cmd_cache_clear(const std::string& dir, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    auto cache = open_existing_cache(dir);
    const std::size_t removed = cache ? cache->clear() : 0;
    out << removed << (removed == 1 ? " entry" : " entries") << " removed\n";
    return exit_ok;
  });
}

int cmd_cache_inspect(const std::string& dir, const std::string& key, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    auto cache = open_existing_cache(dir);
    if (!cache)
    {
      throw FileError("cache directory '" + dir + "' does not exist");
    }
    // match on the printed form: hand names are sanitized in keys
    std::optional<CacheKey> parsed;
    for (const auto& l : cache->list())
    {
      parsed = l.key.str() == key ? std::optional<CacheKey>(l.key) : parsed;
    }
    const auto entry = parsed ? cache->peek(*parsed) : std::nullopt;
    if (!entry)
    {
      err << "unknown key '" << key << "'\n";
      return static_cast<int>(exit_empty);
    }
    const json doc{{"key", key},
                   {"ee_name", parsed->ee_name},
                   {"digest", parsed->digest.hex()},
                   {"provenance", {{"generator", entry->provenance.generator}, {"params_hash", entry->provenance.params_hash}}},
                   {"grasp_count", entry->grasps.size()}};
    out << doc.dump(1) << "\n";
    return static_cast<int>(exit_ok);
  });
}

struct SuiteRow
{
  std::string name;
  std::string task;
  std::string robot;
  std::string config;
  std::optional<std::size_t> min_candidates;
  std::optional<std::size_t> max_candidates;
  std::optional<std::size_t> steps;
  std::vector<std::string> statuses;  // allowed per-step statuses; empty allows both
};

std::string resolve(const fs::path& base, const std::string& p)
{
  return fs::path(p).is_relative() ? (base / p).string() : p;
}

std::optional<std::size_t> optional_count(const json& row, const std::string& key, const std::string& path)
{
  if (!row.contains(key))
  {
    return std::nullopt;
  }
  const json& v = row.at(key);
  if (!v.is_number_unsigned())
  {
    throw SchemaError(json_io::child(path, key), "must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

int cmd_verify(const std::string& suite_path, int jobs, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    require_file("suite", suite_path);
    json suite;
    {
      std::ifstream in(suite_path);
      try
      {
        suite = json::parse(in);
      }
      catch (const json::parse_error& e)
      {
        throw SchemaError("/", std::string("suite is not valid JSON: ") + e.what());
      }
    }
    if (!suite.is_object())
    {
      throw SchemaError("/", "suite must be an object");
    }
    const fs::path base = fs::path(suite_path).parent_path();
    const json& fixtures = json_io::require(suite, "fixtures", "");
    if (!fixtures.is_array())
    {
      throw SchemaError("/fixtures", "must be an array");
    }
    const std::string default_robot = suite.contains("robot") ? json_io::read_string(suite, "robot", "") : "";
    const std::string default_config = suite.contains("config") ? json_io::read_string(suite, "config", "") : "";
    const std::uint64_t seed = suite.value("seed", std::uint64_t{0});

    // the whole suite is validated before anything runs
    std::vector<SuiteRow> rows;
    for (std::size_t i = 0; i < fixtures.size(); ++i)
    {
      const std::string path = json_io::child("/fixtures", i);
      const json& f = fixtures[i];
      if (!f.is_object())
      {
        throw SchemaError(path, "fixture must be an object");
      }
      SuiteRow row;
      row.task = resolve(base, json_io::read_string(f, "task", path));
      row.name = f.contains("name") ? json_io::read_string(f, "name", path) : fs::path(row.task).stem().string();
      const std::string robot = f.contains("robot") ? json_io::read_string(f, "robot", path) : default_robot;
      if (robot.empty())
      {
        throw SchemaError(json_io::child(path, "robot"), "no robot for this fixture and no suite default");
      }
      row.robot = resolve(base, robot);
      const std::string config = f.contains("config") ? json_io::read_string(f, "config", path) : default_config;
      row.config = config.empty() ? "" : resolve(base, config);
      row.min_candidates = optional_count(f, "min_candidates", path);
      row.max_candidates = optional_count(f, "max_candidates", path);
      row.steps = optional_count(f, "steps", path);
      if (f.contains("statuses"))
      {
        for (std::size_t k = 0; k < f.at("statuses").size(); ++k)
        {
          const std::string s = f.at("statuses")[k].get<std::string>();
          if (s != "exact" && s != "tolerance_only")
          {
            throw SchemaError(json_io::child(json_io::child(path, "statuses"), k), "unknown status '" + s + "'");
          }
          row.statuses.push_back(s);
        }
      }
      require_file("task file", row.task);
      require_file("robot description", row.robot);
      if (!row.config.empty())
      {
        require_file("planner config", row.config);
      }
      rows.push_back(std::move(row));
    }

    if (rows.empty())
    {
      out << "warning: 0 fixtures in suite\n";
      return static_cast<int>(exit_ok);
    }

    std::vector<std::string> failed;
    out << std::left << std::setw(16) << "fixture" << std::setw(12) << "candidates" << std::setw(8) << "result"
        << "detail\n";
    for (const auto& row : rows)
    {
      const Robot robot = load_robot(row.robot);
      const TaskDescription task = load_task(row.task, robot);
      GraspPlanner planner(load_config(row.config, ""));
      PlanOptions opts;
      opts.seed = seed;
      opts.jobs = std::max(1, jobs);
      const PlanResult r = planner.plan(task, robot, opts);
      const std::size_t n = r.candidates.size();

      std::vector<std::string> problems;
      if (row.min_candidates && n < *row.min_candidates)
      {
        problems.push_back("expected at least " + std::to_string(*row.min_candidates) + " candidates");
      }
      if (row.max_candidates && n > *row.max_candidates)
      {
        problems.push_back("expected at most " + std::to_string(*row.max_candidates) + " candidates");
      }
      for (const auto& c : r.candidates)
      {
        if (row.steps && c.per_step_status.size() != *row.steps)
        {
          problems.push_back("a candidate has " + std::to_string(c.per_step_status.size()) + " step statuses, expected " +
                             std::to_string(*row.steps));
          break;
        }
        bool allowed = true;
        for (const auto st : c.per_step_status)
        {
          allowed = allowed && (row.statuses.empty() ||
                                std::find(row.statuses.begin(), row.statuses.end(), to_string(st)) != row.statuses.end());
        }
        if (!allowed)
        {
          problems.push_back("a candidate has a status outside the allowed set");
          break;
        }
      }
      std::string detail;
      for (const auto& p : problems)
      {
        detail += (detail.empty() ? "" : "; ") + p;
      }
      out << std::left << std::setw(16) << row.name << std::setw(12) << n << std::setw(8)
          << (problems.empty() ? "PASS" : "FAIL") << detail << "\n";
      if (!problems.empty())
      {
        failed.push_back(row.name);
      }
    }
    if (failed.empty())
    {
      out << rows.size() << " fixtures passed\n";
      return static_cast<int>(exit_ok);
    }
    std::string names;
    for (const auto& f : failed)
    {
      names += (names.empty() ? "" : ", ") + f;
    }
    out << "FAILED: " << names << "\n";
    err << failed.size() << " of " << rows.size() << " fixtures failed: " << names << "\n";
    return static_cast<int>(exit_empty);
  });
}

struct ServeArgs
{
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string ui;
  std::string config;
  std::string cache_dir;
  std::string assets = ".";
  int jobs = 1;
};

int cmd_serve(const ServeArgs& a, std::ostream& out, std::ostream& err)
{
  return guarded(err, [&] {
    ServiceOptions o;
    o.planner = load_config(a.config, a.cache_dir);
    o.asset_dir = a.assets;
    o.jobs = a.jobs;
    GraspService service(o);
    ServeOptions s;
    s.host = a.host;
    s.port = a.port;
    s.ui_dir = a.ui;
    const bool ok = serve(service, s, [&](int port) {
      out << "listening on http://" << a.host << ":" << port << "\n" << std::flush;
    });
    if (!ok)
    {
      throw FileError("cannot bind " + a.host + ":" + std::to_string(a.port));
    }
    return static_cast<int>(exit_ok);
  });
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Grasp planning toolkit", "graspforge"};
  app.require_subcommand(1);

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Plan grasps for one task");
  plan_cmd->add_option("--robot", plan.robot, "Robot description (JSON)")->required();
  plan_cmd->add_option("--task", plan.task, "Task description (JSON)")->required();
  plan_cmd->add_option("--config", plan.config, "Planner config (JSON); built-in defaults when omitted");
  plan_cmd->add_option("--out", plan.out, "Write the top grasps as JSON, or as a table when the name ends in .tsv");
  plan_cmd->add_option("--top", plan.top, "Candidates to report; 0 reports all")->capture_default_str();
  plan_cmd->add_option("--seed", plan.seed, "Seed for every random stream")->capture_default_str();
  plan_cmd->add_option("--jobs", plan.jobs, "Worker threads; output does not depend on it")
    ->check(CLI::PositiveNumber)
    ->capture_default_str();
  plan_cmd->add_option("--cache-dir", plan.cache_dir, "Keep generator output on disk here")
    ->envname("GRASPFORGE_CACHE_DIR");

  std::string cache_dir;
  std::string inspect_key;
  auto* cache_cmd = app.add_subcommand("cache", "Inspect or clear the on-disk grasp cache");
  cache_cmd->require_subcommand(1);
  cache_cmd->add_option("--cache-dir", cache_dir, "Cache directory")->envname("GRASPFORGE_CACHE_DIR");
  auto* list_cmd = cache_cmd->add_subcommand("list", "List keys with grasp counts");
  auto* clear_cmd = cache_cmd->add_subcommand("clear", "Remove every entry");
  auto* inspect_cmd = cache_cmd->add_subcommand("inspect", "Show one entry's provenance and grasp count");
  inspect_cmd->add_option("key", inspect_key, "Entry key as printed by list")->required();

  std::string suite;
  int verify_jobs = 1;
  auto* verify_cmd = app.add_subcommand("verify", "Run a fixture suite and print a pass/fail matrix");
  verify_cmd->add_option("--suite", suite, "Suite file (JSON)")->required();
  verify_cmd->add_option("--jobs", verify_jobs, "Worker threads")->check(CLI::PositiveNumber);

  ServeArgs serve_args;
  auto* serve_cmd = app.add_subcommand("serve", "Run the planning service");
  serve_cmd->add_option("--port", serve_args.port, "TCP port; 0 picks a free one")
    ->envname("GRASPFORGE_PORT")
    ->capture_default_str();
  serve_cmd->add_option("--host", serve_args.host, "Address to bind")->capture_default_str();
  serve_cmd->add_option("--ui", serve_args.ui, "Directory of built UI assets, served at /ui");
  serve_cmd->add_option("--config", serve_args.config, "Planner config (JSON)");
  serve_cmd->add_option("--cache-dir", serve_args.cache_dir, "Keep generator output on disk here")
    ->envname("GRASPFORGE_CACHE_DIR");
  serve_cmd->add_option("--assets", serve_args.assets, "Mesh files named in task documents resolve here")
    ->capture_default_str();
  serve_cmd->add_option("--jobs", serve_args.jobs, "Worker threads per plan")->check(CLI::PositiveNumber);

  std::vector<std::string> argv_store{"graspforge"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_store)
  {
    argv.push_back(s.data());
  }

  try
  {
    app.parse(static_cast<int>(argv.size()), argv.data());
  }
  catch (const CLI::CallForHelp&)
  {
    const CLI::App* target = &app;
    for (auto* sub : {plan_cmd, cache_cmd, verify_cmd, serve_cmd})
    {
      target = sub->parsed() ? sub : target;
    }
    out << target->help();
    return exit_ok;
  }
  catch (const CLI::ParseError& e)
  {
    const CLI::App* target = &app;
    for (auto* sub : {plan_cmd, cache_cmd, verify_cmd, serve_cmd})
    {
      target = sub->parsed() ? sub : target;
    }
    err << "error: " << e.what() << "\n\n" << target->help();
    return exit_error;
  }

  if (plan_cmd->parsed())
  {
    return cmd_plan(plan, out, err);
  }
  if (list_cmd->parsed())
  {
    return cmd_cache_list(cache_dir, out, err);
  }
  if (clear_cmd->parsed())
  {
    return cmd_cache_clear(cache_dir, out, err);
  }
  if (inspect_cmd->parsed())
  {
    return cmd_cache_inspect(cache_dir, inspect_key, out, err);
  }
  if (verify_cmd->parsed())
  {
    return cmd_verify(suite, verify_jobs, out, err);
  }
  return cmd_serve(serve_args, out, err);
}

}  // namespace graspforge
