#include "clarify/cache.hpp"

#include <mutex>

#include <nlohmann/json.hpp>

#include "clarify/error.hpp"
#include "clarify/text.hpp"

namespace clarify {

using nlohmann::json;

CompletionCache::CompletionCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path CompletionCache::entry_path(const std::string& digest) const {
  return dir_ / digest.substr(0, 2) / (digest + ".json");
}

std::optional<CacheEntry> CompletionCache::get(const std::string& digest) const {
  {
    std::shared_lock lock(mu_);
    if (auto it = memo_.find(digest); it != memo_.end()) return it->second;
  }
  if (dir_.empty() || digest.size() < 2) return std::nullopt;
  auto path = entry_path(digest);
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  CacheEntry entry;
  try {
    auto j = json::parse(read_file(path));
    entry = CacheEntry{j.at("digest").get<std::string>(), j.at("reply").get<std::string>(),
                       j.value("model", std::string()), j.value("created", std::string())};
  } catch (const json::exception& e) {
    fail(ErrorCode::StorageFailure, "corrupt cache entry '" + path.string() + "': " + e.what());
  } catch (const Error& e) {
    fail(ErrorCode::StorageFailure, e.what());
  }
  if (entry.digest != digest) {
    fail(ErrorCode::StorageFailure, "cache entry '" + path.string() + "' has a mismatched digest");
  }
  std::unique_lock lock(mu_);
  return memo_.try_emplace(digest, std::move(entry)).first->second;
}

void CompletionCache::put(CacheEntry entry) {
  if (!dir_.empty()) {
    json j{{"digest", entry.digest},
           {"reply", entry.reply},
           {"model", entry.model},
           {"created", entry.created}};
    write_file_atomic(entry_path(entry.digest), j.dump(2) + "\n");
  }
  std::unique_lock lock(mu_);
  memo_[entry.digest] = std::move(entry);
}

std::size_t CompletionCache::size() const {
  std::shared_lock lock(mu_);
  return memo_.size();
}

}  // namespace clarify
