#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "graspforge/geometry/digest.hpp"
#include "graspforge/task/task.hpp"

namespace graspforge
{

struct CacheKey
{
  std::string ee_name;
  MeshDigest digest;

  /// "<digest hex>_<ee name>", also the on-disk file stem.
  std::string str() const;
  static std::optional<CacheKey> parse(const std::string& s);

  auto operator<=>(const CacheKey&) const = default;
};

/// Which generator produced an entry. `params_hash` covers the generator
/// name, its effective parameters and the seed.
struct Provenance
{
  std::string generator;
  std::string params_hash;

  static Provenance of(const std::string& generator, const nlohmann::json& params, std::uint64_t seed);
  bool operator==(const Provenance&) const = default;
};

struct CacheEntry
{
  Provenance provenance;
  std::vector<Grasp> grasps;
};

struct CacheListing
{
  CacheKey key;
  Provenance provenance;
  std::size_t grasp_count = 0;
};

/// Generator output keyed by (hand, object digest). Disk mode keeps one JSON
/// file per key under `dir`; entries survive process restarts. Readers share
/// a lock; writers are exclusive.
class GraspCache
{
public:
  enum class Mode
  {
    memory,
    disk
  };

  static GraspCache in_memory();
  /// Creates `dir` when missing.
  static GraspCache on_disk(const std::filesystem::path& dir);

  GraspCache(GraspCache&&) noexcept = default;
  GraspCache& operator=(GraspCache&&) noexcept = default;

  Mode mode() const { return mode_; }
  const std::filesystem::path& dir() const { return dir_; }

  /// Miss when absent, corrupt (a warning is recorded) or produced with a
  /// different provenance.
  std::optional<std::vector<Grasp>> get(const CacheKey& key, const Provenance& provenance) const;
  /// Any provenance; used for inspection.
  std::optional<CacheEntry> peek(const CacheKey& key) const;

  /// Returns true when an entry with a different provenance was replaced.
  bool put(const CacheKey& key, const CacheEntry& entry);

  std::vector<CacheListing> list() const;
  /// Returns the number of entries removed.
  std::size_t clear();

  /// Corrupt-entry and overwrite reports, oldest first.
  std::vector<std::string> warnings() const;

private:
  GraspCache() = default;

  std::filesystem::path path_for(const CacheKey& key) const;
  std::optional<CacheEntry> load(const std::filesystem::path& file, const CacheKey& key) const;
  void warn(std::string message) const;

  Mode mode_ = Mode::memory;
  std::filesystem::path dir_;
  std::map<CacheKey, CacheEntry> memory_;
  mutable std::vector<std::string> warnings_;
  mutable std::unique_ptr<std::shared_mutex> mutex_ = std::make_unique<std::shared_mutex>();
  mutable std::unique_ptr<std::mutex> warn_mutex_ = std::make_unique<std::mutex>();
};

nlohmann::json serialize_cache_entry(const CacheKey& key, const CacheEntry& entry);

}  // namespace graspforge
