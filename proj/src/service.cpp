#include "clarify/service.hpp"

#include <httplib.h>

#include "clarify/error.hpp"

namespace clarify {

using nlohmann::json;

HttpError http_error_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return {400, false};
    case ErrorCode::UnknownSession:
      return {404, false};
    case ErrorCode::WrongState:
      return {409, false};
    case ErrorCode::BackendExhausted:
    case ErrorCode::BackendFailure:
    case ErrorCode::NoCategoryFound:
    case ErrorCode::InvalidCategoryLetter:
    case ErrorCode::NoRouteFound:
    case ErrorCode::NoScoreFound:
    case ErrorCode::OutOfRange:
      return {502, true};
    case ErrorCode::AuthFailure:
    case ErrorCode::ScriptMiss:
      return {502, false};
    default:
      return {500, false};
  }
}

json error_body(std::string_view code, std::string_view message, bool retriable) {
  return json{{"error", {{"code", code}, {"message", message}, {"retriable", retriable}}}};
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const Error& e) {
  auto h = http_error_for(e.code());
  send_json(res, h.status, error_body(error_code_name(e.code()), e.what(), h.retriable));
}

// Parses the body as a JSON object and returns the string field `key`.
// Missing, non-string or blank fields are reported as InvalidArgument.
std::string required_field(const httplib::Request& req, const char* key) {
  json body;
  try {
    body = json::parse(req.body);
  } catch (const json::exception&) {
    fail(ErrorCode::InvalidArgument, "request body must be a JSON object");
  }
  if (!body.is_object() || !body.contains(key) || !body[key].is_string()) {
    fail(ErrorCode::InvalidArgument, std::string("request body needs a string '") + key + "'");
  }
  auto value = body[key].get<std::string>();
  if (trim(value).empty()) fail(ErrorCode::InvalidArgument, std::string("'") + key + "' must not be empty");
  return value;
}

template <typename F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const Error& e) {
    send_error(res, e);
  } catch (const std::exception& e) {
    send_json(res, 500, error_body("Internal", e.what(), false));
  }
}

}  // namespace

HttpService::HttpService(std::shared_ptr<SessionManager> sessions, ServiceOptions options)
    : sessions_(std::move(sessions)), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  auto& srv = *server_;
  auto sessions_ptr = sessions_;

  srv.set_default_headers({{"Access-Control-Allow-Origin", options_.allow_origin},
                           {"Access-Control-Allow-Headers", "Content-Type"},
                           {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});

  srv.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  srv.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, json{{"status", "ok"}});
  });

  srv.Post("/sessions", [sessions_ptr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto statement = required_field(req, "statement");
      send_json(res, 201, session_resource(sessions_ptr->begin_session(statement)));
    });
  });

  srv.Get(R"(/sessions/([^/]+))", [sessions_ptr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { send_json(res, 200, session_resource(sessions_ptr->get(req.matches[1]))); });
  });

  srv.Post(R"(/sessions/([^/]+)/answer)", [sessions_ptr](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::string id = req.matches[1];
      sessions_ptr->get(id);  // 404 before validating the body
      auto answer = required_field(req, "answer");
      send_json(res, 200, session_resource(sessions_ptr->answer_session(id, answer)));
    });
  });

  srv.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (!res.body.empty()) return;
    const char* code = res.status == 404 ? "NotFound" : res.status == 405 ? "MethodNotAllowed" : "HttpError";
    send_json(res, res.status, error_body(code, httplib::status_message(res.status), false));
  });
}

HttpService::~HttpService() { stop(); }

void HttpService::bind() {
  bool ok;
  if (options_.port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
    ok = port_ > 0;
  } else {
    port_ = options_.port;
    ok = server_->bind_to_port(options_.host, options_.port);
  }
  if (!ok) {
    fail(ErrorCode::ConfigError,
         "cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
}

int HttpService::start() {
  bind();
  thread_ = std::jthread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void HttpService::run() {
  bind();
  server_->listen_after_bind();
}

void HttpService::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace clarify
