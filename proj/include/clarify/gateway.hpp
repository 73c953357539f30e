#pragma once

// Chat-completion gateway: one front door over a remote OpenAI-compatible
// service or a scripted fixture, with retry, rate limiting and caching.

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clarify/cache.hpp"
#include "clarify/error.hpp"

namespace clarify {

enum class Role { System, User, Assistant };

std::string_view to_string(Role r);

struct Message {
  Role role = Role::User;
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

struct CompletionRequest {
  std::vector<Message> messages;
  std::string model = "gpt-4";
  double temperature = 0.0;
  int max_tokens = 512;
  std::string tag;  // experiment label; not part of the digest
};

struct Usage {
  std::size_t prompt_tokens = 0;
  std::size_t reply_tokens = 0;
};

struct Completion {
  std::string text;
  Usage usage;
  bool cached = false;
  std::chrono::milliseconds latency{0};
};

// SHA-256 over (messages, model, temperature, max_tokens).
std::string request_digest(const CompletionRequest& request);

// All message contents joined by newlines; what fixture patterns match against.
std::string prompt_text(const CompletionRequest& request);

// A retryable backend failure: HTTP 429, 5xx, timeouts, dropped connections.
class TransientError : public Error {
 public:
  TransientError(int status, const std::string& message)
      : Error(ErrorCode::BackendFailure, message), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

struct BackendReply {
  std::string text;
  std::optional<Usage> usage;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // Throws TransientError for retryable failures, Error(AuthFailure) for
  // rejected credentials, Error(BackendFailure) otherwise.
  virtual BackendReply send(const CompletionRequest& request) = 0;
  virtual std::string name() const = 0;
};

struct FixtureEntry {
  std::optional<std::string> digest;
  std::vector<std::string> contains;  // every pattern must occur
  std::string response;
  // "transient" | "auth" | "fatal" simulates a backend failure.
  std::optional<std::string> error;
  bool repeat = false;  // not consumed on use
};

struct ScriptFixture {
  std::vector<FixtureEntry> entries;
  bool strict = true;
  std::optional<std::string> fallback;  // non-strict reply when nothing matches

  static ScriptFixture load(const std::filesystem::path& path);
  static ScriptFixture from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

// Replays a fixture. Unconsumed entries are scanned in order and the first
// match wins; matching is serialized so replay is deterministic.
class ScriptedBackend : public Backend {
 public:
  explicit ScriptedBackend(ScriptFixture fixture);

  BackendReply send(const CompletionRequest& request) override;
  std::string name() const override { return "fixture"; }

  std::size_t calls() const;

 private:
  mutable std::mutex mu_;
  ScriptFixture fixture_;
  std::vector<bool> consumed_;
  std::size_t calls_ = 0;
};

struct RemoteConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string api_key;
  std::chrono::seconds timeout{60};

  // CLARIFY_BASE_URL / OPENAI_BASE_URL and CLARIFY_API_KEY / OPENAI_API_KEY.
  static RemoteConfig from_env();
};

// POST {base_url}/chat/completions.
class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig config);

  BackendReply send(const CompletionRequest& request) override;
  std::string name() const override { return "remote"; }

 private:
  RemoteConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

struct RetryPolicy {
  int max_retries = 4;
  std::chrono::milliseconds base_delay{500};
  std::chrono::milliseconds max_delay{30000};
};

// Token bucket refilled continuously at `per_minute` tokens per minute.
class RateLimiter {
 public:
  explicit RateLimiter(double per_minute, double burst = 1.0);
  void acquire();

 private:
  std::mutex mu_;
  double per_second_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

struct GatewayOptions {
  RetryPolicy retry;
  double requests_per_minute = 0;  // 0 disables rate limiting
  bool use_cache = true;
};

class Gateway {
 public:
  Gateway(std::shared_ptr<Backend> backend, std::shared_ptr<CompletionCache> cache,
          GatewayOptions options = {});

  // Throws BackendExhausted, ScriptMiss, AuthFailure, BackendFailure,
  // InvalidArgument (no messages or an empty message).
  Completion complete(const CompletionRequest& request);

  Backend& backend() { return *backend_; }
  const GatewayOptions& options() const { return options_; }

 private:
  std::shared_ptr<Backend> backend_;
  std::shared_ptr<CompletionCache> cache_;
  GatewayOptions options_;
  std::unique_ptr<RateLimiter> limiter_;
};

}  // namespace clarify
