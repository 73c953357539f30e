#pragma once

// HTTP JSON API over a SessionManager:
//   POST /sessions               {statement}  -> 201 session resource
//   GET  /sessions/{id}                       -> 200 session resource
//   POST /sessions/{id}/answer   {answer}     -> 200 session resource
//   GET  /health                              -> 200 {status}
// Errors are {"error": {"code", "message", "retriable"}}.

#include <memory>
#include <string>
#include <thread>

#include <nlohmann/json.hpp>

#include "clarify/session.hpp"

namespace httplib {
class Server;
}

namespace clarify {

struct ServiceOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string allow_origin = "*";
};

struct HttpError {
  int status = 500;
  bool retriable = false;
};

// Status and retriable flag for an error code.
HttpError http_error_for(ErrorCode code);
nlohmann::json error_body(std::string_view code, std::string_view message, bool retriable);

class HttpService {
 public:
  HttpService(std::shared_ptr<SessionManager> sessions, ServiceOptions options = {});
  ~HttpService();

  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  // Binds and serves on a background thread; returns the bound port. Throws
  // ConfigError when the address cannot be bound.
  int start();
  // Binds and serves on the calling thread until stop().
  void run();
  void stop();

  int port() const { return port_; }

 private:
  void bind();

  std::shared_ptr<SessionManager> sessions_;
  ServiceOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::jthread thread_;
  int port_ = 0;
};

}  // namespace clarify
