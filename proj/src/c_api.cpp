#include "clarify/clarify.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>

#include <nlohmann/json.hpp>

#include "clarify/commands.hpp"
#include "clarify/error.hpp"
#include "clarify/prompts.hpp"
#include "clarify/service.hpp"
#include "clarify/session.hpp"
#include "clarify/store.hpp"

#ifndef CLARIFY_VERSION
#define CLARIFY_VERSION "0.0.0"
#endif

using nlohmann::json;

struct clarify_engine {
  clarify::RunConfig config;
  std::shared_ptr<clarify::Gateway> gateway;
  std::unique_ptr<clarify::RunStore> store;
  std::shared_ptr<clarify::SessionManager> sessions;
  std::mutex service_mu;
  std::unique_ptr<clarify::HttpService> service;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_code;

clarify_status status_for(clarify::ErrorCode code) {
  using clarify::ErrorCode;
  switch (code) {
    case ErrorCode::InvalidArgument:
      return CLARIFY_ERR_ARGUMENT;
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidN:
    case ErrorCode::EmptySeed:
      return CLARIFY_ERR_CONFIG;
    case ErrorCode::UnmappedLabel:
    case ErrorCode::InvalidCategoryLetter:
    case ErrorCode::FileUnreadable:
    case ErrorCode::MalformedRow:
    case ErrorCode::DuplicateId:
    case ErrorCode::UnknownStatementId:
    case ErrorCode::DuplicateLabeler:
    case ErrorCode::EmptyCorpus:
    case ErrorCode::NoEligibleStatements:
    case ErrorCode::MissingArticle:
    case ErrorCode::MissingCategory:
    case ErrorCode::LengthMismatch:
    case ErrorCode::EmptyAfterFilter:
    case ErrorCode::EmptyInput:
    case ErrorCode::NoOverlap:
      return CLARIFY_ERR_DATA;
    case ErrorCode::OutOfRange:
    case ErrorCode::BackendExhausted:
    case ErrorCode::BackendFailure:
    case ErrorCode::ScriptMiss:
    case ErrorCode::AuthFailure:
    case ErrorCode::NoCategoryFound:
    case ErrorCode::NoRouteFound:
    case ErrorCode::NoScoreFound:
      return CLARIFY_ERR_BACKEND;
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownRun:
      return CLARIFY_ERR_NOT_FOUND;
    case ErrorCode::WrongState:
      return CLARIFY_ERR_STATE;
    case ErrorCode::StorageFailure:
      return CLARIFY_ERR_STORAGE;
    case ErrorCode::MissingSlot:
      return CLARIFY_ERR_INTERNAL;
  }
  return CLARIFY_ERR_INTERNAL;
}

clarify_status set_error(clarify_status status, std::string_view code, std::string_view message) {
  g_last_code = code;
  g_last_error = message;
  return status;
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

template <typename F>
clarify_status guarded(F&& f) {
  g_last_error.clear();
  g_last_code.clear();
  try {
    f();
    return CLARIFY_OK;
  } catch (const clarify::Error& e) {
    return set_error(status_for(e.code()), clarify::error_code_name(e.code()), e.what());
  } catch (const json::exception& e) {
    return set_error(CLARIFY_ERR_CONFIG, "ConfigError", e.what());
  } catch (const std::bad_alloc&) {
    return set_error(CLARIFY_ERR_INTERNAL, "Internal", "out of memory");
  } catch (const std::exception& e) {
    return set_error(CLARIFY_ERR_INTERNAL, "Internal", e.what());
  }
}

json parse_request(const char* text) {
  if (!text || !*text) return json::object();
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    clarify::fail(clarify::ErrorCode::ConfigError, std::string("request is not valid JSON: ") + e.what());
  }
}

clarify::RunConfig parse_config(const char* text) {
  auto j = parse_request(text);
  clarify::RunConfig config;
  j.get_to(config);
  return config;
}

void require(const void* p, const char* what) {
  if (!p) clarify::fail(clarify::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

clarify::ServiceOptions service_options(const char* text) {
  auto j = parse_request(text);
  clarify::ServiceOptions o;
  o.host = j.value("host", o.host);
  o.port = j.value("port", o.port);
  o.allow_origin = j.value("allow_origin", o.allow_origin);
  if (o.port < 0 || o.port > 65535) clarify::fail(clarify::ErrorCode::ConfigError, "port out of range");
  return o;
}

}  // namespace

extern "C" {

const char* clarify_version(void) { return CLARIFY_VERSION; }

const char* clarify_last_error(void) { return g_last_error.c_str(); }

const char* clarify_last_error_code(void) { return g_last_code.c_str(); }

void clarify_free_string(char* s) { std::free(s); }

clarify_status clarify_engine_new(const char* config_json, clarify_engine** out) {
  if (out) *out = nullptr;
  return guarded([&] {
    require(out, "out");
    auto j = parse_request(config_json);
    auto engine = std::make_unique<clarify_engine>();
    j.get_to(engine->config);
    if (!j.contains("router")) engine->config.router = clarify::RouterKind::Llm;
    engine->gateway = clarify::make_gateway(engine->config);
    if (!engine->config.store_dir.empty()) {
      engine->store = std::make_unique<clarify::RunStore>(engine->config.store_dir);
    }
    clarify::SessionOptions options;
    options.pipeline = clarify::PipelineOptions::from(engine->config);
    engine->sessions = std::make_shared<clarify::SessionManager>(engine->gateway, options, engine->store.get());
    *out = engine.release();
  });
}

void clarify_engine_free(clarify_engine* engine) {
  if (!engine) return;
  {
    std::lock_guard lock(engine->service_mu);
    if (engine->service) engine->service->stop();
  }
  delete engine;
}

clarify_status clarify_session_begin(clarify_engine* engine, const char* statement, char** resource_json) {
  if (resource_json) *resource_json = nullptr;
  return guarded([&] {
    require(engine, "engine");
    require(statement, "statement");
    require(resource_json, "resource_json");
    auto s = engine->sessions->begin_session(statement);
    *resource_json = dup_string(clarify::session_resource(s).dump());
  });
}

clarify_status clarify_session_answer(clarify_engine* engine, const char* session_id, const char* answer,
                                      char** resource_json) {
  if (resource_json) *resource_json = nullptr;
  return guarded([&] {
    require(engine, "engine");
    require(session_id, "session_id");
    require(answer, "answer");
    require(resource_json, "resource_json");
    auto s = engine->sessions->answer_session(session_id, answer);
    *resource_json = dup_string(clarify::session_resource(s).dump());
  });
}

clarify_status clarify_session_get(clarify_engine* engine, const char* session_id, char** resource_json) {
  if (resource_json) *resource_json = nullptr;
  return guarded([&] {
    require(engine, "engine");
    require(session_id, "session_id");
    require(resource_json, "resource_json");
    *resource_json = dup_string(clarify::session_resource(engine->sessions->get(session_id)).dump());
  });
}

clarify_status clarify_serve(clarify_engine* engine, const char* options_json) {
  return guarded([&] {
    require(engine, "engine");
    clarify::HttpService* service;
    {
      std::lock_guard lock(engine->service_mu);
      if (engine->service) clarify::fail(clarify::ErrorCode::WrongState, "the engine is already serving");
      engine->service = std::make_unique<clarify::HttpService>(engine->sessions, service_options(options_json));
      service = engine->service.get();
    }
    service->run();
  });
}

clarify_status clarify_serve_start(clarify_engine* engine, const char* options_json, int* port) {
  return guarded([&] {
    require(engine, "engine");
    std::lock_guard lock(engine->service_mu);
    if (engine->service) clarify::fail(clarify::ErrorCode::WrongState, "the engine is already serving");
    auto service = std::make_unique<clarify::HttpService>(engine->sessions, service_options(options_json));
    int bound = service->start();
    engine->service = std::move(service);
    if (port) *port = bound;
  });
}

clarify_status clarify_serve_stop(clarify_engine* engine) {
  return guarded([&] {
    require(engine, "engine");
    std::lock_guard lock(engine->service_mu);
    if (engine->service) engine->service->stop();
  });
}

clarify_status clarify_run(const char* config_json, clarify_progress_fn progress, void* user_data,
                           char** report_json) {
  if (report_json) *report_json = nullptr;
  return guarded([&] {
    require(report_json, "report_json");
    auto config = parse_config(config_json);
    clarify::ProgressFn fn;
    if (progress) {
      auto mu = std::make_shared<std::mutex>();
      fn = [progress, user_data, mu](std::size_t done, std::size_t total) {
        std::lock_guard lock(*mu);
        progress(done, total, user_data);
      };
    }
    *report_json = dup_string(clarify::run_command(config, fn).dump());
  });
}

clarify_status clarify_analyze(const char* request_json, char** result_json) {
  if (result_json) *result_json = nullptr;
  return guarded([&] {
    require(result_json, "result_json");
    *result_json = dup_string(clarify::analyze_command(parse_request(request_json)).dump());
  });
}

clarify_status clarify_report(const char* request_json, char** result_json) {
  if (result_json) *result_json = nullptr;
  return guarded([&] {
    require(result_json, "result_json");
    *result_json = dup_string(clarify::report_command(parse_request(request_json)).dump());
  });
}

clarify_status clarify_template_catalog(char** catalog_json) {
  if (catalog_json) *catalog_json = nullptr;
  return guarded([&] {
    require(catalog_json, "catalog_json");
    *catalog_json = dup_string(clarify::template_catalog().dump());
  });
}

}  // extern "C"
