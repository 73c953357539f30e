#include "clarify/gateway.hpp"

#include <chrono>
#include <cstdlib>
#include <fmt/format.h>
#include <thread>

#include <httplib.h>

#include "clarify/domain.hpp"
#include "clarify/text.hpp"

namespace clarify {

using nlohmann::json;

namespace {

bool matches(const FixtureEntry& e, const std::string& digest, const std::string& prompt) {
  if (e.digest && *e.digest != digest) return false;
  for (const auto& p : e.contains) {
    if (prompt.find(p) == std::string::npos) return false;
  }
  return e.digest.has_value() || !e.contains.empty();
}

bool is_hex_digest(const std::string& s) {
  if (s.size() != 64) return false;
  for (char c : s) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace

std::string_view to_string(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

std::string request_digest(const CompletionRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back(json::array({std::string(to_string(m.role)), m.content}));
  }
  json canonical{{"messages", messages},
                 {"model", request.model},
                 {"temperature", request.temperature},
                 {"max_tokens", request.max_tokens}};
  return sha256_hex(canonical.dump());
}

std::string prompt_text(const CompletionRequest& request) {
  std::string out;
  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    if (i) out += '\n';
    out += request.messages[i].content;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fixture

ScriptFixture ScriptFixture::load(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ConfigError, "fixture '" + path.string() + "': " + e.what());
  }
  return from_json(j);
}

ScriptFixture ScriptFixture::from_json(const json& j) {
  ScriptFixture f;
  try {
    f.strict = j.value("strict", true);
    if (j.contains("default") && !j["default"].is_null()) f.fallback = j["default"].get<std::string>();
    for (const auto& e : j.at("entries")) {
      FixtureEntry entry;
      if (e.contains("digest")) entry.digest = e["digest"].get<std::string>();
      if (e.contains("match")) {
        auto m = e["match"].get<std::string>();
        if (is_hex_digest(m)) entry.digest = m;
        else entry.contains.push_back(m);
      }
      if (e.contains("contains")) {
        if (e["contains"].is_array()) {
          for (const auto& p : e["contains"]) entry.contains.push_back(p.get<std::string>());
        } else {
          entry.contains.push_back(e["contains"].get<std::string>());
        }
      }
      if (!entry.digest && entry.contains.empty()) {
        fail(ErrorCode::ConfigError, "fixture entry needs a digest or a pattern");
      }
      entry.response = e.value("response", std::string());
      if (e.contains("error")) entry.error = e["error"].get<std::string>();
      entry.repeat = e.value("repeat", false);
      f.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("malformed fixture: ") + e.what());
  }
  return f;
}

json ScriptFixture::to_json() const {
  json entries = json::array();
  for (const auto& e : this->entries) {
    json o{{"response", e.response}};
    if (e.digest) o["digest"] = *e.digest;
    if (!e.contains.empty()) o["contains"] = e.contains;
    if (e.error) o["error"] = *e.error;
    if (e.repeat) o["repeat"] = true;
    entries.push_back(std::move(o));
  }
  json j{{"strict", strict}, {"entries", entries}};
  if (fallback) j["default"] = *fallback;
  return j;
}

ScriptedBackend::ScriptedBackend(ScriptFixture fixture)
    : fixture_(std::move(fixture)), consumed_(fixture_.entries.size(), false) {}

BackendReply ScriptedBackend::send(const CompletionRequest& request) {
  const auto digest = request_digest(request);
  const auto prompt = prompt_text(request);
  std::lock_guard lock(mu_);
  ++calls_;
  for (std::size_t i = 0; i < fixture_.entries.size(); ++i) {
    if (consumed_[i]) continue;
    const auto& e = fixture_.entries[i];
    if (!matches(e, digest, prompt)) continue;
    if (!e.repeat) consumed_[i] = true;
    if (e.error) {
      if (*e.error == "transient") throw TransientError(503, "scripted transient failure");
      if (*e.error == "auth") fail(ErrorCode::AuthFailure, "scripted authentication failure");
      fail(ErrorCode::BackendFailure, "scripted backend failure");
    }
    return BackendReply{e.response, std::nullopt};
  }
  if (!fixture_.strict) return BackendReply{fixture_.fallback.value_or(""), std::nullopt};
  fail(ErrorCode::ScriptMiss, "no fixture entry matches prompt digest " + digest);
}

std::size_t ScriptedBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

// ---------------------------------------------------------------------------
// Remote

RemoteConfig RemoteConfig::from_env() {
  RemoteConfig c;
  auto env = [](const char* a, const char* b) -> const char* {
    if (const char* v = std::getenv(a); v && *v) return v;
    if (const char* v = std::getenv(b); v && *v) return v;
    return nullptr;
  };
  if (auto v = env("CLARIFY_BASE_URL", "OPENAI_BASE_URL")) c.base_url = v;
  if (auto v = env("CLARIFY_API_KEY", "OPENAI_API_KEY")) c.api_key = v;
  return c;
}

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  auto url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    fail(ErrorCode::ConfigError, "base url '" + config_.base_url + "' lacks a scheme");
  }
  auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = (path_start == std::string::npos ? std::string() : url.substr(path_start)) +
          "/chat/completions";
}

BackendReply RemoteBackend::send(const CompletionRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", std::string(to_string(m.role))}, {"content", m.content}});
  }
  json body{{"model", request.model},
            {"messages", messages},
            {"temperature", request.temperature},
            {"max_tokens", request.max_tokens}};

  httplib::Client client(scheme_host_port_);
  auto secs = static_cast<time_t>(config_.timeout.count());
  client.set_connection_timeout(secs, 0);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  auto res = client.Post(path_, headers, body.dump(), "application/json");
  if (!res) {
    throw TransientError(0, "request to " + scheme_host_port_ + " failed: " +
                                httplib::to_string(res.error()));
  }
  const int status = res->status;
  if (status == 401 || status == 403) {
    fail(ErrorCode::AuthFailure, "backend rejected credentials (HTTP " + std::to_string(status) + ")");
  }
  if (status == 429 || status >= 500) {
    throw TransientError(status, "backend returned HTTP " + std::to_string(status));
  }
  if (status < 200 || status >= 300) {
    fail(ErrorCode::BackendFailure,
         "backend returned HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200));
  }
  try {
    auto j = json::parse(res->body);
    const auto& choice = j.at("choices").at(0);
    BackendReply reply;
    const auto& content = choice.at("message").at("content");
    reply.text = content.is_null() ? std::string() : content.get<std::string>();
    if (j.contains("usage") && j["usage"].is_object()) {
      reply.usage = Usage{j["usage"].value("prompt_tokens", std::size_t{0}),
                          j["usage"].value("completion_tokens", std::size_t{0})};
    }
    return reply;
  } catch (const json::exception& e) {
    fail(ErrorCode::BackendFailure, std::string("unparseable completion response: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Rate limiting and the gateway proper

RateLimiter::RateLimiter(double per_minute, double burst)
    : per_second_(per_minute / 60.0),
      burst_(burst),
      tokens_(burst),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  std::unique_lock lock(mu_);
  for (;;) {
    auto now = std::chrono::steady_clock::now();
    std::chrono::duration<double> elapsed = now - last_;
    tokens_ = std::min(burst_, tokens_ + elapsed.count() * per_second_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    auto wait = std::chrono::duration<double>((1.0 - tokens_) / per_second_);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

Gateway::Gateway(std::shared_ptr<Backend> backend, std::shared_ptr<CompletionCache> cache,
                 GatewayOptions options)
    : backend_(std::move(backend)), cache_(std::move(cache)), options_(options) {
  if (!backend_) fail(ErrorCode::ConfigError, "gateway needs a backend");
  if (options_.requests_per_minute > 0) {
    limiter_ = std::make_unique<RateLimiter>(options_.requests_per_minute);
  }
}

Completion Gateway::complete(const CompletionRequest& request) {
  if (request.messages.empty()) fail(ErrorCode::InvalidArgument, "completion request has no messages");
  for (const auto& m : request.messages) {
    if (m.content.empty()) fail(ErrorCode::InvalidArgument, "completion request has an empty message");
  }
  const auto digest = request_digest(request);
  const bool caching = options_.use_cache && cache_ != nullptr;
  if (caching) {
    if (auto hit = cache_->get(digest)) {
      return Completion{hit->reply,
                        Usage{count_words(prompt_text(request)), count_words(hit->reply)},
                        true, std::chrono::milliseconds(0)};
    }
  }

  for (int attempt = 0;; ++attempt) {
    if (limiter_) limiter_->acquire();
    auto start = std::chrono::steady_clock::now();
    try {
      auto reply = backend_->send(request);
      Completion c;
      c.latency = std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::steady_clock::now() - start);
      c.usage = reply.usage.value_or(
          Usage{count_words(prompt_text(request)), count_words(reply.text)});
      c.text = std::move(reply.text);
      if (caching) cache_->put(CacheEntry{digest, c.text, request.model, now_iso8601()});
      return c;
    } catch (const TransientError& e) {
      if (attempt >= options_.retry.max_retries) {
        fail(ErrorCode::BackendExhausted, "gave up after " + std::to_string(attempt + 1) +
                                              " attempts: " + e.what());
      }
      auto delay = options_.retry.base_delay * (1LL << std::min(attempt, 20));
      std::this_thread::sleep_for(std::min<std::chrono::milliseconds>(delay, options_.retry.max_delay));
    }
  }
}

}  // namespace clarify
