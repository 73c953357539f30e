#include <gtest/gtest.h>

#include <httplib.h>

#include <set>
#include <thread>

#include "clarify/error.hpp"
#include "clarify/service.hpp"
#include "clarify/session.hpp"
#include "clarify/store.hpp"
#include "support.hpp"

using namespace clarify;
using namespace clarify::testing;
using nlohmann::json;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::ConfigError;
}

// One script serving every statement used below; the first matching entry
// wins, so statement-specific entries come first.
json session_script() {
  auto entry = [](json contains, std::string response) {
    return json{{"contains", std::move(contains)}, {"response", std::move(response)}, {"repeat", true}};
  };
  json auth = {{"contains", {"Given Statement: Locked claim."}}, {"error", "auth"}, {"repeat", true}};
  return json{{"strict", true},
              {"entries",
               {
                   auth,
                   entry({"Respond with a 'U'", "Web claim."}, "W"),
                   entry({"Rate the truthfulness", "Broken verdict."}, "no idea"),
                   entry({"Given Statement: "}, "Which nurse do you mean? A"),
                   entry({"Respond with a 'U'"}, "U"),
                   entry({"Rate the truthfulness"}, "The statement is accurate. 1"),
               }}};
}

struct Harness {
  ScriptedGateway sg{session_script()};
  std::shared_ptr<SessionManager> manager;
  explicit Harness(RunStore* store = nullptr) {
    manager = std::make_shared<SessionManager>(sg.gateway, SessionOptions{}, store);
  }
};

// Structural check for the subset of JSON Schema used by the session schema:
// type (string or list), enum, required, properties, additionalProperties
// and items.
bool type_matches(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "number") return v.is_number();
  if (t == "null") return v.is_null();
  if (t == "boolean") return v.is_boolean();
  return false;
}

void validate(const json& v, const json& schema, const std::string& where, std::vector<std::string>& problems) {
  if (schema.contains("type")) {
    bool ok = false;
    if (schema["type"].is_string()) {
      ok = type_matches(v, schema["type"]);
    } else {
      for (const auto& t : schema["type"]) ok = ok || type_matches(v, t);
    }
    if (!ok) {
      problems.push_back(where + ": type " + std::string(v.type_name()));
      return;
    }
  }
  if (v.is_null()) return;
  if (schema.contains("enum")) {
    bool found = false;
    for (const auto& e : schema["enum"]) found = found || e == v;
    if (!found) problems.push_back(where + ": value " + v.dump() + " not in enum");
  }
  if (v.is_object()) {
    for (const auto& key : schema.value("required", json::array())) {
      if (!v.contains(key.get<std::string>())) problems.push_back(where + ": missing " + key.get<std::string>());
    }
    const auto props = schema.value("properties", json::object());
    for (const auto& [key, value] : v.items()) {
      if (props.contains(key)) {
        validate(value, props[key], where + "." + key, problems);
      } else if (!schema.value("additionalProperties", true)) {
        problems.push_back(where + ": unexpected " + key);
      }
    }
  }
  if (v.is_array() && schema.contains("items")) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      validate(v[i], schema["items"], where + "[" + std::to_string(i) + "]", problems);
    }
  }
}

std::vector<std::string> schema_problems(const json& resource) {
  static const json schema = load_json(std::filesystem::path(CLARIFY_DOCS_DIR) / "session_schema.json");
  std::vector<std::string> problems;
  validate(resource, schema, "$", problems);
  return problems;
}

}  // namespace

TEST(Session, BeginThenAnswer) {
  Harness h;
  auto s = h.manager->begin_session("  The nurse was fired.  ");
  EXPECT_EQ(s.statement, "The nurse was fired.");
  EXPECT_EQ(s.state, SessionState::AwaitingAnswer);
  EXPECT_EQ(s.question, "Which nurse do you mean?");
  EXPECT_EQ(s.categories, std::vector<Category>{Category::Speaker});
  ASSERT_TRUE(s.route);
  EXPECT_EQ(s.route->value, RouteValue::UserQuery);
  EXPECT_EQ(s.route->source, RouteSource::LlmRouter);
  EXPECT_FALSE(s.verdict);
  EXPECT_TRUE(valid_session_id(s.id));
  EXPECT_EQ(s.transcript.size(), 2u);

  auto done = h.manager->answer_session(s.id, "A nurse in Ohio.");
  EXPECT_EQ(done.state, SessionState::Completed);
  ASSERT_TRUE(done.verdict);
  EXPECT_EQ(done.verdict->snapped, 1.0);
  EXPECT_EQ(done.answer, "A nurse in Ohio.");
  EXPECT_EQ(h.manager->get(s.id), done);
  EXPECT_EQ(h.sg.backend->calls(), 3u);
}

TEST(Session, Errors) {
  Harness h;
  EXPECT_EQ(code_of([&] { h.manager->begin_session("   "); }), ErrorCode::InvalidArgument);
  EXPECT_EQ(code_of([&] { h.manager->get("missing"); }), ErrorCode::UnknownSession);
  EXPECT_EQ(code_of([&] { h.manager->get("../etc"); }), ErrorCode::UnknownSession);
  auto s = h.manager->begin_session("The nurse was fired.");
  EXPECT_EQ(code_of([&] { h.manager->answer_session(s.id, " "); }), ErrorCode::InvalidArgument);
  h.manager->answer_session(s.id, "Ohio.");
  EXPECT_EQ(code_of([&] { h.manager->answer_session(s.id, "again"); }), ErrorCode::WrongState);
}

TEST(Session, RoutedToWebIsTerminal) {
  Harness h;
  auto s = h.manager->begin_session("Web claim.");
  EXPECT_EQ(s.state, SessionState::RoutedToWeb);
  auto r = session_resource(s);
  EXPECT_EQ(r["message"], std::string(kRoutedToWebMessage));
  EXPECT_TRUE(r["verdict"].is_null());
  EXPECT_EQ(code_of([&] { h.manager->answer_session(s.id, "anything"); }), ErrorCode::WrongState);
}

TEST(Session, FailedStepsRecordTheError) {
  Harness h;
  auto s = h.manager->begin_session("Broken verdict.");
  EXPECT_EQ(code_of([&] { h.manager->answer_session(s.id, "some answer"); }), ErrorCode::NoScoreFound);
  auto after = h.manager->get(s.id);
  EXPECT_EQ(after.state, SessionState::AwaitingAnswer);
  ASSERT_TRUE(after.error);
  EXPECT_EQ(after.error->code, "NoScoreFound");
  EXPECT_FALSE(after.answer);
  EXPECT_EQ(after.transcript.size(), 2u);
}

TEST(Session, StoreFallback) {
  TempDir dir;
  RunStore store(dir.path());
  std::string id;
  {
    Harness h(&store);
    id = h.manager->begin_session("The nurse was fired.").id;
  }
  Harness fresh(&store);
  auto s = fresh.manager->get(id);
  EXPECT_EQ(s.state, SessionState::AwaitingAnswer);
  auto done = fresh.manager->answer_session(id, "Ohio.");
  EXPECT_EQ(done.state, SessionState::Completed);
  auto stored = store.load_session(id);
  ASSERT_TRUE(stored);
  EXPECT_EQ(stored->get<ClarifySession>(), done);
}

TEST(Session, ResourceMatchesSchema) {
  Harness h;
  auto s = h.manager->begin_session("The nurse was fired.");
  EXPECT_TRUE(schema_problems(session_resource(s)).empty());
  auto done = h.manager->answer_session(s.id, "Ohio.");
  auto r = session_resource(done);
  EXPECT_TRUE(schema_problems(r).empty());
  EXPECT_EQ(r["verdict"]["label"], "True");
  EXPECT_EQ(r["categories"][0]["letter"], "A");
  EXPECT_TRUE(schema_problems(session_resource(h.manager->begin_session("Web claim."))).empty());
  auto bad = session_resource(done);
  bad["state"] = "Lost";
  bad["extra"] = 1;
  EXPECT_EQ(schema_problems(bad).size(), 2u);
}

TEST(Session, ConcurrentSessions) {
  Harness h;
  std::vector<std::jthread> threads;
  std::vector<std::string> ids(8);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    threads.emplace_back([&, i] {
      auto s = h.manager->begin_session("The nurse was fired.");
      ids[i] = h.manager->answer_session(s.id, "Ohio.").id;
    });
  }
  threads.clear();
  std::set<std::string> unique(ids.begin(), ids.end());
  EXPECT_EQ(unique.size(), ids.size());
  for (const auto& id : ids) EXPECT_EQ(h.manager->get(id).state, SessionState::Completed);
}

TEST(HttpErrors, Mapping) {
  EXPECT_EQ(http_error_for(ErrorCode::InvalidArgument).status, 400);
  EXPECT_EQ(http_error_for(ErrorCode::UnknownSession).status, 404);
  EXPECT_EQ(http_error_for(ErrorCode::WrongState).status, 409);
  EXPECT_TRUE(http_error_for(ErrorCode::BackendExhausted).retriable);
  EXPECT_EQ(http_error_for(ErrorCode::NoScoreFound).status, 502);
  EXPECT_FALSE(http_error_for(ErrorCode::AuthFailure).retriable);
  EXPECT_EQ(http_error_for(ErrorCode::StorageFailure).status, 500);
}

class HttpApi : public ::testing::Test {
 protected:
  void SetUp() override {
    ServiceOptions o;
    o.port = 0;
    service = std::make_unique<HttpService>(h.manager, o);
    port = service->start();
    client = std::make_unique<httplib::Client>("127.0.0.1", port);
  }
  void TearDown() override { service->stop(); }

  httplib::Result post(const std::string& path, const json& body) {
    return client->Post(path, body.dump(), "application/json");
  }

  Harness h;
  std::unique_ptr<HttpService> service;
  std::unique_ptr<httplib::Client> client;
  int port = 0;
};

TEST_F(HttpApi, Health) {
  auto res = client->Get("/health");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["status"], "ok");
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Origin"), "*");
}

TEST_F(HttpApi, FullFlow) {
  auto created = post("/sessions", {{"statement", "The nurse was fired."}});
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  auto resource = json::parse(created->body);
  EXPECT_TRUE(schema_problems(resource).empty());
  EXPECT_EQ(resource["state"], "AwaitingAnswer");
  const std::string id = resource["id"];

  auto fetched = client->Get("/sessions/" + id);
  ASSERT_TRUE(fetched);
  EXPECT_EQ(fetched->status, 200);
  EXPECT_EQ(json::parse(fetched->body), resource);

  auto answered = post("/sessions/" + id + "/answer", {{"answer", "Ohio."}});
  ASSERT_TRUE(answered);
  EXPECT_EQ(answered->status, 200);
  auto done = json::parse(answered->body);
  EXPECT_EQ(done["state"], "Completed");
  EXPECT_EQ(done["verdict"]["snapped"], 1.0);
  EXPECT_TRUE(schema_problems(done).empty());

  auto again = post("/sessions/" + id + "/answer", {{"answer", "Ohio."}});
  ASSERT_TRUE(again);
  EXPECT_EQ(again->status, 409);
  EXPECT_EQ(json::parse(again->body)["error"]["code"], "WrongState");
}

TEST_F(HttpApi, BadRequests) {
  auto blank = post("/sessions", {{"statement", "  "}});
  ASSERT_TRUE(blank);
  EXPECT_EQ(blank->status, 400);
  EXPECT_EQ(json::parse(blank->body)["error"]["code"], "InvalidArgument");

  auto garbage = client->Post("/sessions", "not json", "application/json");
  ASSERT_TRUE(garbage);
  EXPECT_EQ(garbage->status, 400);

  auto missing = client->Get("/sessions/nope");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  EXPECT_EQ(json::parse(missing->body)["error"]["code"], "UnknownSession");

  auto missing_answer = post("/sessions/nope/answer", {{"answer", "x"}});
  ASSERT_TRUE(missing_answer);
  EXPECT_EQ(missing_answer->status, 404);

  auto unknown_route = client->Get("/elsewhere");
  ASSERT_TRUE(unknown_route);
  EXPECT_EQ(unknown_route->status, 404);
  EXPECT_EQ(json::parse(unknown_route->body)["error"]["code"], "NotFound");
}

TEST_F(HttpApi, BackendErrorsAre502) {
  auto created = post("/sessions", {{"statement", "Broken verdict."}});
  ASSERT_TRUE(created);
  const std::string id = json::parse(created->body)["id"];
  auto res = post("/sessions/" + id + "/answer", {{"answer", "x"}});
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 502);
  auto err = json::parse(res->body)["error"];
  EXPECT_EQ(err["code"], "NoScoreFound");
  EXPECT_EQ(err["retriable"], true);

  auto locked = post("/sessions", {{"statement", "Locked claim."}});
  ASSERT_TRUE(locked);
  EXPECT_EQ(locked->status, 502);
  EXPECT_EQ(json::parse(locked->body)["error"]["retriable"], false);
}

TEST_F(HttpApi, Preflight) {
  auto res = client->Options("/sessions");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 204);
  EXPECT_EQ(res->get_header_value("Access-Control-Allow-Methods"), "GET, POST, OPTIONS");
}
