#pragma once

// Shared helpers for the unit and acceptance tests.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "clarify/gateway.hpp"

namespace clarify::testing {

inline std::filesystem::path fixture_path(const std::string& name) {
  return std::filesystem::path(CLARIFY_FIXTURE_DIR) / name;
}

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "clarify-test-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << content;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline nlohmann::json load_json(const std::filesystem::path& path) { return nlohmann::json::parse(slurp(path)); }

// Gateway over a scripted backend, an in-memory cache and instant retries.
struct ScriptedGateway {
  std::shared_ptr<ScriptedBackend> backend;
  std::shared_ptr<Gateway> gateway;

  explicit ScriptedGateway(const nlohmann::json& fixture, bool use_cache = false, int max_retries = 2) {
    backend = std::make_shared<ScriptedBackend>(ScriptFixture::from_json(fixture));
    GatewayOptions o;
    o.retry.max_retries = max_retries;
    o.retry.base_delay = std::chrono::milliseconds(0);
    o.retry.max_delay = std::chrono::milliseconds(0);
    o.use_cache = use_cache;
    gateway = std::make_shared<Gateway>(backend, std::make_shared<CompletionCache>(), o);
  }

  Gateway& operator*() { return *gateway; }
};

}  // namespace clarify::testing
