#pragma once

#include <filesystem>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>

namespace clarify {

struct CacheEntry {
  std::string digest;
  std::string reply;
  std::string model;
  std::string created;  // ISO-8601 UTC

  friend bool operator==(const CacheEntry&, const CacheEntry&) = default;
};

// Completion cache keyed by request digest, persisted as
// <dir>/<first two digest chars>/<digest>.json. An empty dir keeps the cache
// in memory only. Last write wins per digest.
class CompletionCache {
 public:
  explicit CompletionCache(std::filesystem::path dir = {});

  std::optional<CacheEntry> get(const std::string& digest) const;
  // Throws StorageFailure.
  void put(CacheEntry entry);

  std::size_t size() const;
  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path entry_path(const std::string& digest) const;

 private:
  std::filesystem::path dir_;
  mutable std::shared_mutex mu_;
  mutable std::unordered_map<std::string, CacheEntry> memo_;
};

}  // namespace clarify
