#pragma once

// Interactive clarification sessions: statement -> category-targeted question
// -> user answer -> verdict.
//
//   AwaitingQuestion --begin--> AwaitingAnswer --answer--> Completed
//                          \--> RoutedToWeb (terminal)
//
// A failed step leaves the session in its current state with the error
// recorded.

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clarify/pipeline.hpp"

namespace clarify {

class RunStore;

enum class SessionState { AwaitingQuestion, AwaitingAnswer, RoutedToWeb, Completed };

std::string_view to_string(SessionState s);
SessionState parse_session_state(std::string_view text);

struct SessionError {
  std::string code;
  std::string message;

  friend bool operator==(const SessionError&, const SessionError&) = default;
};

struct ClarifySession {
  std::string id;
  std::string statement;
  SessionState state = SessionState::AwaitingQuestion;
  std::optional<std::string> question;
  std::optional<std::vector<Category>> categories;
  std::optional<Route> route;
  std::optional<std::string> answer;
  std::optional<VeracityScore> verdict;  // present iff Completed
  std::optional<SessionError> error;
  Transcript transcript;
  std::string created;
  std::string updated;

  friend bool operator==(const ClarifySession&, const ClarifySession&) = default;
};

// Full stored form.
void to_json(nlohmann::json& j, const ClarifySession& s);
void from_json(const nlohmann::json& j, ClarifySession& s);

// "False", "Uncertain" or "True" for a snapped score.
std::string_view verdict_label(double snapped);

// The API projection: {id, state, statement, question, categories, route,
// answer, verdict, message, error}.
nlohmann::json session_resource(const ClarifySession& s);

// Advisory text for sessions routed to web retrieval.
inline constexpr std::string_view kRoutedToWebMessage =
    "The missing information is likely available through a web search, so no question is posed to "
    "the user. Web retrieval is not performed by this tool.";

struct SessionOptions {
  PipelineOptions pipeline = [] {
    PipelineOptions o;
    o.router = RouterKind::Llm;
    return o;
  }();
};

// Thread-safe. Operations on one session are serialized; different sessions
// proceed in parallel. With a store, every transition is persisted and
// sessions unknown in memory are looked up there.
class SessionManager {
 public:
  SessionManager(std::shared_ptr<Gateway> gateway, SessionOptions options = {}, RunStore* store = nullptr);

  // Throws InvalidArgument for blank text and propagates step errors (the
  // failed session is still stored).
  ClarifySession begin_session(const std::string& statement);

  // Throws UnknownSession, WrongState, InvalidArgument for a blank answer,
  // and propagates step errors.
  ClarifySession answer_session(const std::string& id, const std::string& answer);

  // Throws UnknownSession.
  ClarifySession get(const std::string& id);

 private:
  struct Slot {
    std::mutex mu;
    ClarifySession session;
  };

  std::shared_ptr<Slot> slot(const std::string& id);
  std::string new_id();
  void persist(const ClarifySession& s);

  std::shared_ptr<Gateway> gateway_;
  SessionOptions options_;
  RunStore* store_;
  std::mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

// Ids are 1-64 characters from [A-Za-z0-9_-].
bool valid_session_id(std::string_view id);

}  // namespace clarify
