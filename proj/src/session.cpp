#include "clarify/session.hpp"

#include <cctype>
#include <fmt/format.h>
#include <random>

#include "clarify/error.hpp"
#include "clarify/json_io.hpp"
#include "clarify/store.hpp"
#include "clarify/text.hpp"

namespace clarify {

using nlohmann::json;

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::AwaitingQuestion: return "AwaitingQuestion";
    case SessionState::AwaitingAnswer: return "AwaitingAnswer";
    case SessionState::RoutedToWeb: return "RoutedToWeb";
    case SessionState::Completed: return "Completed";
  }
  return "AwaitingQuestion";
}

SessionState parse_session_state(std::string_view text) {
  for (auto s : {SessionState::AwaitingQuestion, SessionState::AwaitingAnswer, SessionState::RoutedToWeb,
                 SessionState::Completed}) {
    if (to_string(s) == text) return s;
  }
  fail(ErrorCode::StorageFailure, "unknown session state '" + std::string(text) + "'");
}

std::string_view verdict_label(double snapped) {
  if (snapped == 0.0) return "False";
  if (snapped == 1.0) return "True";
  return "Uncertain";
}

void to_json(json& j, const ClarifySession& s) {
  json transcript = json::array();
  for (const auto& t : s.transcript) transcript.push_back({{"digest", t.digest}, {"reply", t.reply}});
  j = json{{"id", s.id},
           {"statement", s.statement},
           {"state", std::string(to_string(s.state))},
           {"question", s.question ? json(*s.question) : json(nullptr)},
           {"categories", s.categories ? json(category_letters(*s.categories)) : json(nullptr)},
           {"route", s.route ? json(*s.route) : json(nullptr)},
           {"answer", s.answer ? json(*s.answer) : json(nullptr)},
           {"verdict", s.verdict ? json(*s.verdict) : json(nullptr)},
           {"error", s.error ? json{{"code", s.error->code}, {"message", s.error->message}} : json(nullptr)},
           {"transcript", transcript},
           {"created", s.created},
           {"updated", s.updated}};
}

void from_json(const json& j, ClarifySession& s) {
  auto present = [&](const char* key) { return j.contains(key) && !j[key].is_null(); };
  s.id = j.at("id").get<std::string>();
  s.statement = j.at("statement").get<std::string>();
  s.state = parse_session_state(j.at("state").get<std::string>());
  s.question = present("question") ? std::optional(j["question"].get<std::string>()) : std::nullopt;
  s.categories.reset();
  if (present("categories")) s.categories = categories_from_letters(j["categories"].get<std::vector<std::string>>());
  s.route = present("route") ? std::optional(j["route"].get<Route>()) : std::nullopt;
  s.answer = present("answer") ? std::optional(j["answer"].get<std::string>()) : std::nullopt;
  s.verdict = present("verdict") ? std::optional(j["verdict"].get<VeracityScore>()) : std::nullopt;
  s.error.reset();
  if (present("error")) {
    s.error = SessionError{j["error"].at("code").get<std::string>(), j["error"].at("message").get<std::string>()};
  }
  s.transcript.clear();
  for (const auto& t : j.value("transcript", json::array())) {
    s.transcript.push_back({t.at("digest").get<std::string>(), t.at("reply").get<std::string>()});
  }
  s.created = j.value("created", std::string());
  s.updated = j.value("updated", std::string());
}

json session_resource(const ClarifySession& s) {
  json categories = nullptr;
  if (s.categories) {
    categories = json::array();
    for (auto c : *s.categories) categories.push_back(category_json(c));
  }
  json verdict = nullptr;
  if (s.state == SessionState::Completed && s.verdict) {
    verdict = {{"snapped", s.verdict->snapped}, {"label", std::string(verdict_label(s.verdict->snapped))}};
  }
  return json{{"id", s.id},
              {"state", std::string(to_string(s.state))},
              {"statement", s.statement},
              {"question", s.question ? json(*s.question) : json(nullptr)},
              {"categories", categories},
              {"route", s.route ? json(*s.route) : json(nullptr)},
              {"answer", s.answer ? json(*s.answer) : json(nullptr)},
              {"verdict", verdict},
              {"message", s.state == SessionState::RoutedToWeb ? json(std::string(kRoutedToWebMessage))
                                                                : json(nullptr)},
              {"error", s.error ? json{{"code", s.error->code}, {"message", s.error->message}} : json(nullptr)}};
}

bool valid_session_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (unsigned char c : id) {
    if (!std::isalnum(c) && c != '_' && c != '-') return false;
  }
  return true;
}

SessionManager::SessionManager(std::shared_ptr<Gateway> gateway, SessionOptions options, RunStore* store)
    : gateway_(std::move(gateway)), options_(std::move(options)), store_(store) {}

std::string SessionManager::new_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::uniform_int_distribution<std::uint64_t> dist;
  return fmt::format("{:016x}", dist(rng));
}

void SessionManager::persist(const ClarifySession& s) {
  if (store_) store_->save_session(s.id, s);
}

std::shared_ptr<SessionManager::Slot> SessionManager::slot(const std::string& id) {
  if (!valid_session_id(id)) fail(ErrorCode::UnknownSession, "no session '" + id + "'");
  std::lock_guard lock(mu_);
  if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
  if (store_) {
    if (auto stored = store_->load_session(id)) {
      auto s = std::make_shared<Slot>();
      try {
        s->session = stored->get<ClarifySession>();
      } catch (const json::exception& e) {
        fail(ErrorCode::StorageFailure, "corrupt session '" + id + "': " + e.what());
      }
      sessions_[id] = s;
      return s;
    }
  }
  fail(ErrorCode::UnknownSession, "no session '" + id + "'");
}

ClarifySession SessionManager::begin_session(const std::string& statement) {
  if (trim(statement).empty()) fail(ErrorCode::InvalidArgument, "statement must not be empty");
  auto s = std::make_shared<Slot>();
  std::lock_guard session_lock(s->mu);
  {
    std::lock_guard lock(mu_);
    std::string id;
    do {
      id = new_id();
    } while (sessions_.contains(id));
    s->session.id = id;
    sessions_[id] = s;
  }
  auto& session = s->session;
  session.statement = trim(statement);
  session.created = session.updated = now_iso8601();

  Statement st;
  st.id = session.id;
  st.text = session.statement;
  Pipeline pipeline(*gateway_, options_.pipeline);
  try {
    auto q = pipeline.step_question(st, QuestionMode::CategoryBased, session.transcript);
    session.question = q.question;
    session.categories = q.categories;
    auto router = options_.pipeline.router == RouterKind::None ? RouterKind::Heuristic : options_.pipeline.router;
    session.route = pipeline.step_route(st, q.question, q.categories, router, session.transcript);
    session.state = session.route->value == RouteValue::UserQuery ? SessionState::AwaitingAnswer
                                                                   : SessionState::RoutedToWeb;
    session.error.reset();
  } catch (const Error& e) {
    session.error = SessionError{std::string(error_code_name(e.code())), e.what()};
    session.updated = now_iso8601();
    persist(session);
    throw;
  }
  session.updated = now_iso8601();
  persist(session);
  return session;
}

ClarifySession SessionManager::answer_session(const std::string& id, const std::string& answer) {
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  auto& session = s->session;
  if (session.state != SessionState::AwaitingAnswer) {
    fail(ErrorCode::WrongState, "session '" + id + "' is " + std::string(to_string(session.state)) +
                                    ", not AwaitingAnswer");
  }
  if (trim(answer).empty()) fail(ErrorCode::InvalidArgument, "answer must not be empty");

  Statement st;
  st.id = session.id;
  st.text = session.statement;
  Pipeline pipeline(*gateway_, options_.pipeline);
  auto transcript = session.transcript;
  try {
    auto score = pipeline.step_verdict(st, {QaContext{*session.question, trim(answer)}, std::nullopt},
                                       VerdictMode::Enabled, transcript);
    session.answer = trim(answer);
    session.verdict = score;
    session.state = SessionState::Completed;
    session.error.reset();
    session.transcript = std::move(transcript);
  } catch (const Error& e) {
    session.error = SessionError{std::string(error_code_name(e.code())), e.what()};
    session.updated = now_iso8601();
    persist(session);
    throw;
  }
  session.updated = now_iso8601();
  persist(session);
  return session;
}

ClarifySession SessionManager::get(const std::string& id) {
  auto s = slot(id);
  std::lock_guard lock(s->mu);
  return s->session;
}

}  // namespace clarify
