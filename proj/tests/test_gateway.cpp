#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "clarify/cache.hpp"
#include "clarify/error.hpp"
#include "clarify/gateway.hpp"
#include "clarify/text.hpp"
#include "support.hpp"

using namespace clarify;
using nlohmann::json;
using clarify::testing::ScriptedGateway;
using clarify::testing::TempDir;

namespace {

CompletionRequest user(const std::string& text) {
  CompletionRequest r;
  r.messages = {{Role::User, text}};
  return r;
}

ErrorCode complete_error(Gateway& g, const CompletionRequest& r) {
  try {
    g.complete(r);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::ConfigError;
}

// Local chat-completions endpoint driven by a per-test handler.
class FakeServer {
 public:
  explicit FakeServer(httplib::Server::Handler handler) {
    server_.Post("/v1/chat/completions", std::move(handler));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

Gateway remote_gateway(const std::string& base_url, int retries = 2, const std::string& key = "k") {
  RemoteConfig rc;
  rc.base_url = base_url;
  rc.api_key = key;
  rc.timeout = std::chrono::seconds(5);
  GatewayOptions o;
  o.retry = {retries, std::chrono::milliseconds(1), std::chrono::milliseconds(1)};
  o.use_cache = false;
  return Gateway(std::make_shared<RemoteBackend>(rc), nullptr, o);
}

const char* kOkBody =
    R"({"choices":[{"message":{"role":"assistant","content":"0.5"}}],"usage":{"prompt_tokens":7,"completion_tokens":1}})";

}  // namespace

TEST(Digest, StableAndSensitive) {
  auto a = user("hello");
  auto b = user("hello");
  b.tag = "different tag";
  EXPECT_EQ(request_digest(a), request_digest(b));
  EXPECT_EQ(request_digest(a).size(), 64u);
  auto c = user("hello");
  c.temperature = 0.7;
  EXPECT_NE(request_digest(a), request_digest(c));
  auto d = user("hello");
  d.model = "other";
  EXPECT_NE(request_digest(a), request_digest(d));
  auto e = user("hello");
  e.messages[0].role = Role::System;
  EXPECT_NE(request_digest(a), request_digest(e));
}

TEST(Fixture, ContainsMatchingAndConsumption) {
  ScriptedGateway sg(json{{"entries",
                           {{{"contains", "alpha"}, {"response", "first"}},
                            {{"contains", "alpha"}, {"response", "second"}},
                            {{"contains", json::array({"be", "ta"})}, {"response", "beta"}, {"repeat", true}}}}});
  EXPECT_EQ(sg.gateway->complete(user("alpha one")).text, "first");
  EXPECT_EQ(sg.gateway->complete(user("alpha two")).text, "second");
  EXPECT_EQ(complete_error(*sg, user("alpha three")), ErrorCode::ScriptMiss);
  EXPECT_EQ(sg.gateway->complete(user("beta")).text, "beta");
  EXPECT_EQ(sg.gateway->complete(user("beta")).text, "beta");
  EXPECT_EQ(complete_error(*sg, user("only be")), ErrorCode::ScriptMiss);
  EXPECT_EQ(sg.backend->calls(), 6u);
}

TEST(Fixture, DigestMatch) {
  auto r = user("exact prompt");
  ScriptedGateway sg(json{{"entries", {{{"match", request_digest(r)}, {"response", "by digest"}}}}});
  EXPECT_EQ(complete_error(*sg, user("exact prompt ")), ErrorCode::ScriptMiss);
  EXPECT_EQ(sg.gateway->complete(r).text, "by digest");
}

TEST(Fixture, NonStrictDefault) {
  ScriptedGateway sg(json{{"strict", false}, {"default", "fallback"}, {"entries", json::array()}});
  EXPECT_EQ(sg.gateway->complete(user("anything")).text, "fallback");
}

TEST(Fixture, RejectsEntriesWithoutPattern) {
  try {
    ScriptFixture::from_json(json{{"entries", {{{"response", "x"}}}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(Fixture, JsonRoundTrip) {
  auto f = ScriptFixture::from_json(json{{"strict", false},
                                         {"default", "d"},
                                         {"entries", {{{"contains", "x"}, {"response", "y"}, {"repeat", true}}}}});
  auto back = ScriptFixture::from_json(f.to_json());
  EXPECT_FALSE(back.strict);
  EXPECT_EQ(back.fallback, "d");
  ASSERT_EQ(back.entries.size(), 1u);
  EXPECT_TRUE(back.entries[0].repeat);
  EXPECT_EQ(back.entries[0].contains, std::vector<std::string>{"x"});
}

TEST(Fixture, LoadFromFile) {
  TempDir dir;
  clarify::testing::write_file(dir / "f.json", R"({"entries":[{"contains":"q","response":"r"}]})");
  auto f = ScriptFixture::load(dir / "f.json");
  EXPECT_EQ(f.entries.size(), 1u);
  clarify::testing::write_file(dir / "bad.json", "{nope");
  EXPECT_THROW(ScriptFixture::load(dir / "bad.json"), Error);
}

TEST(Gateway, RetriesTransientThenSucceeds) {
  ScriptedGateway sg(json{{"entries",
                           {{{"contains", "q"}, {"error", "transient"}},
                            {{"contains", "q"}, {"error", "transient"}},
                            {{"contains", "q"}, {"response", "ok"}}}}},
                     false, 2);
  EXPECT_EQ(sg.gateway->complete(user("q")).text, "ok");
  EXPECT_EQ(sg.backend->calls(), 3u);
}

TEST(Gateway, ExhaustsRetries) {
  ScriptedGateway sg(json{{"entries", {{{"contains", "q"}, {"error", "transient"}, {"repeat", true}}}}}, false, 2);
  EXPECT_EQ(complete_error(*sg, user("q")), ErrorCode::BackendExhausted);
  EXPECT_EQ(sg.backend->calls(), 3u);
}

TEST(Gateway, AuthAndFatalAreNotRetried) {
  ScriptedGateway auth(json{{"entries", {{{"contains", "q"}, {"error", "auth"}, {"repeat", true}}}}});
  EXPECT_EQ(complete_error(*auth, user("q")), ErrorCode::AuthFailure);
  EXPECT_EQ(auth.backend->calls(), 1u);
  ScriptedGateway fatal(json{{"entries", {{{"contains", "q"}, {"error", "fatal"}, {"repeat", true}}}}});
  EXPECT_EQ(complete_error(*fatal, user("q")), ErrorCode::BackendFailure);
  EXPECT_EQ(fatal.backend->calls(), 1u);
}

TEST(Gateway, RejectsEmptyRequests) {
  ScriptedGateway sg(json{{"entries", json::array()}});
  EXPECT_EQ(complete_error(*sg, CompletionRequest{}), ErrorCode::InvalidArgument);
  EXPECT_EQ(complete_error(*sg, user("")), ErrorCode::InvalidArgument);
  EXPECT_EQ(sg.backend->calls(), 0u);
}

TEST(Gateway, CacheHitSkipsBackend) {
  ScriptedGateway sg(json{{"entries", {{{"contains", "q"}, {"response", "once"}}}}}, true);
  auto first = sg.gateway->complete(user("q"));
  auto second = sg.gateway->complete(user("q"));
  EXPECT_FALSE(first.cached);
  EXPECT_TRUE(second.cached);
  EXPECT_EQ(second.text, "once");
  EXPECT_EQ(sg.backend->calls(), 1u);
}

TEST(Gateway, UsageFallsBackToWordCounts) {
  ScriptedGateway sg(json{{"entries", {{{"contains", "three word prompt"}, {"response", "two words"}}}}});
  auto c = sg.gateway->complete(user("three word prompt"));
  EXPECT_EQ(c.usage.prompt_tokens, 3u);
  EXPECT_EQ(c.usage.reply_tokens, 2u);
}

TEST(Cache, PersistsAcrossInstances) {
  TempDir dir;
  const std::string digest(64, 'a');
  {
    CompletionCache cache(dir / "cache");
    cache.put({digest, "reply", "gpt-4", "2024-01-01T00:00:00Z"});
    EXPECT_EQ(cache.size(), 1u);
    EXPECT_TRUE(std::filesystem::exists(cache.entry_path(digest)));
    EXPECT_EQ(cache.entry_path(digest).parent_path().filename(), "aa");
  }
  CompletionCache reopened(dir / "cache");
  auto hit = reopened.get(digest);
  ASSERT_TRUE(hit);
  EXPECT_EQ(hit->reply, "reply");
  EXPECT_FALSE(reopened.get(std::string(64, 'b')));
}

TEST(Cache, LastWriteWins) {
  CompletionCache cache;
  const std::string digest(64, 'c');
  cache.put({digest, "one", "m", "t"});
  cache.put({digest, "two", "m", "t"});
  EXPECT_EQ(cache.get(digest)->reply, "two");
  EXPECT_EQ(cache.size(), 1u);
}

TEST(Cache, ConcurrentWriters) {
  TempDir dir;
  CompletionCache cache(dir / "cache");
  std::vector<std::jthread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&cache, t] {
      for (int i = 0; i < 25; ++i) {
        auto d = sha256_hex(std::to_string(t * 100 + i));
        cache.put({d, std::to_string(i), "m", "t"});
      }
    });
  }
  threads.clear();
  EXPECT_EQ(cache.size(), 100u);
}

TEST(Remote, ParsesCompletion) {
  std::string seen_auth;
  json seen_body;
  FakeServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = json::parse(req.body);
    res.set_content(kOkBody, "application/json");
  });
  auto g = remote_gateway(server.base_url());
  auto c = g.complete(user("rate this"));
  EXPECT_EQ(c.text, "0.5");
  EXPECT_EQ(c.usage.prompt_tokens, 7u);
  EXPECT_EQ(seen_auth, "Bearer k");
  EXPECT_EQ(seen_body["messages"][0]["role"], "user");
  EXPECT_EQ(seen_body["model"], "gpt-4");
}

TEST(Remote, RetriesRateLimit) {
  std::atomic<int> hits{0};
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    if (hits++ < 2) {
      res.status = 429;
      return;
    }
    res.set_content(kOkBody, "application/json");
  });
  auto g = remote_gateway(server.base_url(), 3);
  EXPECT_EQ(g.complete(user("x")).text, "0.5");
  EXPECT_EQ(hits.load(), 3);
}

TEST(Remote, AuthFailure) {
  std::atomic<int> hits{0};
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 401;
  });
  auto g = remote_gateway(server.base_url());
  EXPECT_EQ(complete_error(g, user("x")), ErrorCode::AuthFailure);
  EXPECT_EQ(hits.load(), 1);
}

TEST(Remote, ServerErrorsExhaust) {
  FakeServer server([&](const httplib::Request&, httplib::Response& res) { res.status = 503; });
  auto g = remote_gateway(server.base_url(), 1);
  EXPECT_EQ(complete_error(g, user("x")), ErrorCode::BackendExhausted);
}

TEST(Remote, MalformedBody) {
  FakeServer server([&](const httplib::Request&, httplib::Response& res) {
    res.set_content("{\"nothing\": true}", "application/json");
  });
  auto g = remote_gateway(server.base_url());
  EXPECT_EQ(complete_error(g, user("x")), ErrorCode::BackendFailure);
}

TEST(Remote, BadBaseUrl) {
  RemoteConfig rc;
  rc.base_url = "no-scheme";
  EXPECT_THROW(RemoteBackend{rc}, Error);
}

TEST(RateLimiter, SpacesRequests) {
  RateLimiter limiter(600.0);  // 10 per second
  auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < 3; ++i) limiter.acquire();
  auto elapsed = std::chrono::steady_clock::now() - start;
  EXPECT_GE(elapsed, std::chrono::milliseconds(180));
}
