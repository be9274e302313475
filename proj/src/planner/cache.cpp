#include "graspforge/planner/cache.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace graspforge
{
namespace
{

constexpr const char* kFormat = "graspforge-cache/1";

std::string sanitize(const std::string& name)
{
  std::string out = name;
  for (char& c : out)
  {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '.' && c != '_')
    {
      c = '-';
    }
  }
  return out;
}

}  // namespace

std::string CacheKey::str() const
{
  return digest.hex() + "_" + sanitize(ee_name);
}

std::optional<CacheKey> CacheKey::parse(const std::string& s)
{
  if (s.size() < 66 || s[64] != '_')
  {
    return std::nullopt;
  }
  auto d = MeshDigest::from_hex(s.substr(0, 64));
  if (!d)
  {
    return std::nullopt;
  }
  return CacheKey{s.substr(65), *d};
}

Provenance Provenance::of(const std::string& generator, const nlohmann::json& params, std::uint64_t seed)
{
  const nlohmann::json j{{"generator", generator}, {"params", params}, {"seed", seed}};
  return {generator, sha256_hex(j.dump())};
}

nlohmann::json serialize_cache_entry(const CacheKey& key, const CacheEntry& entry)
{
  nlohmann::json grasps = nlohmann::json::array();
  for (const auto& g : entry.grasps)
  {
    grasps.push_back(serialize_grasp(g));
  }
  return {{"format", kFormat},
          {"key", {{"ee_name", key.ee_name}, {"digest", key.digest.hex()}}},
          {"provenance", {{"generator", entry.provenance.generator}, {"params_hash", entry.provenance.params_hash}}},
          {"grasps", std::move(grasps)}};
}

GraspCache GraspCache::in_memory()
{
  return GraspCache();
}

GraspCache GraspCache::on_disk(const std::filesystem::path& dir)
{
  GraspCache c;
  c.mode_ = Mode::disk;
  c.dir_ = dir;
  std::filesystem::create_directories(dir);
  return c;
}

std::filesystem::path GraspCache::path_for(const CacheKey& key) const
{
  return dir_ / (key.str() + ".json");
}

void GraspCache::warn(std::string message) const
{
  std::lock_guard<std::mutex> lock(*warn_mutex_);
  warnings_.push_back(std::move(message));
}

std::vector<std::string> GraspCache::warnings() const
{
  std::lock_guard<std::mutex> lock(*warn_mutex_);
  return warnings_;
}

std::optional<CacheEntry> GraspCache::load(const std::filesystem::path& file, const CacheKey& key) const
{
  std::ifstream in(file);
  if (!in)
  {
    return std::nullopt;
  }
  try
  {
    const nlohmann::json j = nlohmann::json::parse(in);
    if (j.at("format") != kFormat)
    {
      throw std::runtime_error("unknown format '" + j.at("format").dump() + "'");
    }
    if (j.at("key").at("digest").get<std::string>() != key.digest.hex() ||
        j.at("key").at("ee_name").get<std::string>() != key.ee_name)
    {
      throw std::runtime_error("header key does not match the file name");
    }
    CacheEntry e;
    e.provenance.generator = j.at("provenance").at("generator").get<std::string>();
    e.provenance.params_hash = j.at("provenance").at("params_hash").get<std::string>();
    const auto& grasps = j.at("grasps");
    for (std::size_t i = 0; i < grasps.size(); ++i)
    {
      e.grasps.push_back(parse_grasp(grasps[i], "/grasps/" + std::to_string(i)));
      if (e.grasps.back().ee_name != key.ee_name)
      {
        throw std::runtime_error("grasp " + std::to_string(i) + " belongs to another end effector");
      }
    }
    return e;
  }
  catch (const std::exception& ex)
  {
    warn("corrupt cache entry '" + file.string() + "' ignored: " + ex.what());
    return std::nullopt;
  }
}

std::optional<CacheEntry> GraspCache::peek(const CacheKey& key) const
{
  std::shared_lock lock(*mutex_);
  if (mode_ == Mode::memory)
  {
    auto it = memory_.find(key);
    if (it == memory_.end())
    {
      return std::nullopt;
    }
    return it->second;
  }
  return load(path_for(key), key);
}

std::optional<std::vector<Grasp>> GraspCache::get(const CacheKey& key, const Provenance& provenance) const
{
  auto e = peek(key);
  if (!e || !(e->provenance == provenance))
  {
    return std::nullopt;
  }
  return std::move(e->grasps);
}

bool GraspCache::put(const CacheKey& key, const CacheEntry& entry)
{
  for (const auto& g : entry.grasps)
  {
    if (g.ee_name != key.ee_name)
    {
      throw std::invalid_argument("cached grasps must belong to end effector '" + key.ee_name + "'");
    }
  }
  std::unique_lock lock(*mutex_);
  std::optional<Provenance> previous;
  if (mode_ == Mode::memory)
  {
    auto it = memory_.find(key);
    if (it != memory_.end())
    {
      previous = it->second.provenance;
    }
    memory_[key] = entry;
  }
  else
  {
    const auto file = path_for(key);
    if (auto old = load(file, key))
    {
      previous = old->provenance;
    }
    // write-then-rename so a crash never leaves a half-written entry
    const auto tmp = std::filesystem::path(file.string() + ".tmp");
    {
      std::ofstream out(tmp, std::ios::trunc);
      out << serialize_cache_entry(key, entry).dump(1) << "\n";
      if (!out)
      {
        throw std::runtime_error("cannot write cache entry '" + tmp.string() + "'");
      }
    }
    std::filesystem::rename(tmp, file);
  }
  const bool overwritten = previous && !(*previous == entry.provenance);
  if (overwritten)
  {
    warn("cache entry " + key.str() + " regenerated with different generator parameters (" + previous->generator +
         " -> " + entry.provenance.generator + ")");
  }
  return overwritten;
}

std::vector<CacheListing> GraspCache::list() const
{
  std::vector<CacheListing> out;
  if (mode_ == Mode::memory)
  {
    std::shared_lock lock(*mutex_);
    for (const auto& [key, e] : memory_)
    {
      out.push_back({key, e.provenance, e.grasps.size()});
    }
    return out;
  }
  std::vector<std::filesystem::path> files;
  if (std::filesystem::exists(dir_))
  {
    for (const auto& f : std::filesystem::directory_iterator(dir_))
    {
      if (f.path().extension() == ".json")
      {
        files.push_back(f.path());
      }
    }
  }
  std::sort(files.begin(), files.end());
  std::shared_lock lock(*mutex_);
  for (const auto& f : files)
  {
    // the header, not the sanitized file name, carries the exact hand name
    try
    {
      std::ifstream in(f);
      const nlohmann::json j = nlohmann::json::parse(in);
      auto digest = MeshDigest::from_hex(j.at("key").at("digest").get<std::string>());
      if (!digest)
      {
        throw std::runtime_error("bad digest");
      }
      CacheKey key{j.at("key").at("ee_name").get<std::string>(), *digest};
      if (auto e = load(f, key))
      {
        out.push_back({key, e->provenance, e->grasps.size()});
      }
    }
    catch (const std::exception& ex)
    {
      warn("corrupt cache entry '" + f.string() + "' ignored: " + ex.what());
    }
  }
  return out;
}

std::size_t GraspCache::clear()
{
  std::unique_lock lock(*mutex_);
  if (mode_ == Mode::memory)
  {
    const std::size_t n = memory_.size();
    memory_.clear();
    return n;
  }
  std::size_t n = 0;
  if (std::filesystem::exists(dir_))
  {
    for (const auto& f : std::filesystem::directory_iterator(dir_))
    {
      const auto ext = f.path().extension();
      if (ext == ".json" || ext == ".tmp")
      {
        std::filesystem::remove(f.path());
        n += ext == ".json";
      }
    }
  }
  return n;
}

}  // namespace graspforge
