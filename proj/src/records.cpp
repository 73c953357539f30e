#include "clarify/records.hpp"

#include <fmt/format.h>

#include "clarify/error.hpp"
#include "clarify/json_io.hpp"
#include "clarify/text.hpp"

namespace clarify {

using nlohmann::json;

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::BaselineEnabled: return "baseline-enabled";
    case Strategy::BaselineDisabled: return "baseline-disabled";
    case Strategy::GenericQA: return "generic-qa";
    case Strategy::CategoryQA: return "category-qa";
    case Strategy::CategoryQADisabled: return "category-qa-disabled";
    case Strategy::FillBlank: return "fill-blank";
    case Strategy::Oracle: return "oracle";
  }
  return "baseline-enabled";
}

Strategy parse_strategy(std::string_view text) {
  for (auto s : kAllStrategies) {
    if (to_string(s) == text) return s;
  }
  fail(ErrorCode::ConfigError, "unknown strategy '" + std::string(text) + "'");
}

std::string_view display_name(Strategy s) {
  switch (s) {
    case Strategy::BaselineEnabled: return "Baseline (uncertainty enabled)";
    case Strategy::BaselineDisabled: return "Baseline (uncertainty disabled)";
    case Strategy::GenericQA: return "Generic QA";
    case Strategy::CategoryQA: return "Category-based QA";
    case Strategy::CategoryQADisabled: return "Category-based QA (uncertainty disabled)";
    case Strategy::FillBlank: return "Fill-in-the-blank method";
    case Strategy::Oracle: return "Oracle Benchmark";
  }
  return "";
}

bool needs_article(Strategy s) {
  switch (s) {
    case Strategy::GenericQA:
    case Strategy::CategoryQA:
    case Strategy::CategoryQADisabled:
    case Strategy::FillBlank:
    case Strategy::Oracle:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(RouterKind r) {
  switch (r) {
    case RouterKind::None: return "none";
    case RouterKind::Llm: return "llm";
    case RouterKind::Heuristic: return "heuristic";
  }
  return "none";
}

RouterKind parse_router(std::string_view text) {
  if (text == "none") return RouterKind::None;
  if (text == "llm") return RouterKind::Llm;
  if (text == "heuristic") return RouterKind::Heuristic;
  fail(ErrorCode::ConfigError, "unknown router '" + std::string(text) + "'");
}

HeuristicRouteMap default_heuristic_routes() {
  return {{Category::Speaker, RouteValue::UserQuery},
          {Category::Location, RouteValue::WebRetrieval},
          {Category::TextualContext, RouteValue::WebRetrieval},
          {Category::NonTextualEvidence, RouteValue::UserQuery},
          {Category::DateTime, RouteValue::WebRetrieval},
          {Category::Other, RouteValue::WebRetrieval}};
}

// ---------------------------------------------------------------------------
// Records

void to_json(json& j, const StatementRecord& r) {
  json transcript = json::array();
  for (const auto& t : r.transcript) transcript.push_back({{"digest", t.digest}, {"reply", t.reply}});
  j = json{{"statement_id", r.statement_id},
           {"strategy", std::string(to_string(r.strategy))},
           {"question", nullptr},
           {"question_categories", nullptr},
           {"route", nullptr},
           {"answer", nullptr},
           {"context_block", nullptr},
           {"score", r.score},
           {"token_lengths", nullptr},
           {"transcript", transcript}};
  if (r.question) j["question"] = *r.question;
  if (r.question_categories) j["question_categories"] = category_letters(*r.question_categories);
  if (r.route) j["route"] = *r.route;
  if (r.answer) j["answer"] = *r.answer;
  if (r.context_block) j["context_block"] = *r.context_block;
  if (r.token_lengths) {
    j["token_lengths"] = {{"question", r.token_lengths->question}, {"answer", r.token_lengths->answer}};
  }
}

void from_json(const json& j, StatementRecord& r) {
  auto opt_string = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<std::string>();
  };
  r.statement_id = j.at("statement_id").get<std::string>();
  r.strategy = parse_strategy(j.at("strategy").get<std::string>());
  r.question = opt_string("question");
  r.question_categories.reset();
  if (j.contains("question_categories") && !j["question_categories"].is_null()) {
    r.question_categories = categories_from_letters(j["question_categories"].get<std::vector<std::string>>());
  }
  r.route.reset();
  if (j.contains("route") && !j["route"].is_null()) r.route = j["route"].get<Route>();
  r.answer = opt_string("answer");
  r.context_block = opt_string("context_block");
  r.score = j.at("score").get<VeracityScore>();
  r.token_lengths.reset();
  if (j.contains("token_lengths") && !j["token_lengths"].is_null()) {
    r.token_lengths = TokenLengths{j["token_lengths"].at("question").get<std::size_t>(),
                                   j["token_lengths"].at("answer").get<std::size_t>()};
  }
  r.transcript.clear();
  for (const auto& t : j.value("transcript", json::array())) {
    r.transcript.push_back({t.at("digest").get<std::string>(), t.at("reply").get<std::string>()});
  }
}

// ---------------------------------------------------------------------------
// Run configuration

namespace {

json routes_json(const HeuristicRouteMap& m) {
  json j = json::object();
  for (const auto& [c, r] : m) j[std::string(1, letter_of(c))] = std::string(to_string(r));
  return j;
}

}  // namespace

json RunConfig::identity() const {
  return json{{"strategy", std::string(to_string(strategy))},
              {"model", model},
              {"temperature", temperature},
              {"max_tokens", max_tokens},
              {"router", std::string(to_string(router))},
              {"heuristic_routes", routes_json(heuristic_routes)},
              {"enforce_routing", enforce_routing},
              {"abstain_policy", std::string(to_string(policy))},
              {"parse_mode", parse_mode == ParseMode::Strict ? "strict" : "lenient"}};
}

void to_json(json& j, const RunConfig& c) {
  json possibility = json::array();
  for (auto p : c.possibility) possibility.push_back(std::string(to_string(p)));
  j = json{{"strategy", std::string(to_string(c.strategy))},
           {"corpus", c.corpus_path},
           {"schema", c.schema},
           {"annotations", c.annotations_path ? json(*c.annotations_path) : json(nullptr)},
           {"possibility", possibility},
           {"backend", c.backend},
           {"model", c.model},
           {"temperature", c.temperature},
           {"max_tokens", c.max_tokens},
           {"router", std::string(to_string(c.router))},
           {"heuristic_routes", routes_json(c.heuristic_routes)},
           {"enforce_routing", c.enforce_routing},
           {"workers", c.workers},
           {"abstain_policy", std::string(to_string(c.policy))},
           {"parse_mode", c.parse_mode == ParseMode::Strict ? "strict" : "lenient"},
           {"store_dir", c.store_dir},
           {"cache_dir", c.cache_dir},
           {"use_cache", c.use_cache},
           {"requests_per_minute", c.requests_per_minute},
           {"retry",
            {{"max_retries", c.retry.max_retries},
             {"base_delay_ms", c.retry.base_delay.count()},
             {"max_delay_ms", c.retry.max_delay.count()}}}};
}

void from_json(const json& j, RunConfig& c) {
  static const std::set<std::string> known = {
      "strategy",   "corpus",          "schema",         "annotations", "possibility",
      "backend",    "model",           "temperature",    "max_tokens",  "router",
      "heuristic_routes", "enforce_routing", "workers",  "abstain_policy", "parse_mode",
      "store_dir",  "cache_dir",       "use_cache",      "requests_per_minute", "retry"};
  if (!j.is_object()) fail(ErrorCode::ConfigError, "run config must be a JSON object");
  for (auto& [k, v] : j.items()) {
    if (!known.contains(k)) fail(ErrorCode::ConfigError, "unknown run config key '" + k + "'");
  }
  try {
    if (j.contains("strategy")) c.strategy = parse_strategy(j["strategy"].get<std::string>());
    if (j.contains("corpus")) c.corpus_path = j["corpus"].get<std::string>();
    if (j.contains("schema")) {
      j["schema"].get_to(c.schema);
    } else if (!c.corpus_path.empty()) {
      c.schema = SchemaConfig::for_path(c.corpus_path);
    }
    if (j.contains("annotations") && !j["annotations"].is_null()) {
      c.annotations_path = j["annotations"].get<std::string>();
    }
    if (j.contains("possibility")) {
      c.possibility.clear();
      for (const auto& p : j["possibility"]) c.possibility.insert(parse_possibility(p.get<std::string>()));
    }
    c.backend = j.value("backend", c.backend);
    c.model = j.value("model", c.model);
    c.temperature = j.value("temperature", c.temperature);
    c.max_tokens = j.value("max_tokens", c.max_tokens);
    if (j.contains("router")) c.router = parse_router(j["router"].get<std::string>());
    if (j.contains("heuristic_routes")) {
      for (auto& [letter, route] : j["heuristic_routes"].items()) {
        if (letter.size() != 1) fail(ErrorCode::ConfigError, "bad heuristic route key '" + letter + "'");
        c.heuristic_routes[category_from_letter(letter[0])] = parse_route_value(route.get<std::string>());
      }
    }
    c.enforce_routing = j.value("enforce_routing", c.enforce_routing);
    c.workers = j.value("workers", c.workers);
    if (j.contains("abstain_policy")) c.policy = parse_abstain_policy(j["abstain_policy"].get<std::string>());
    if (j.contains("parse_mode")) {
      auto m = j["parse_mode"].get<std::string>();
      if (m == "strict") c.parse_mode = ParseMode::Strict;
      else if (m == "lenient") c.parse_mode = ParseMode::Lenient;
      else fail(ErrorCode::ConfigError, "unknown parse mode '" + m + "'");
    }
    c.store_dir = j.value("store_dir", c.store_dir);
    c.cache_dir = j.value("cache_dir", c.cache_dir);
    c.use_cache = j.value("use_cache", c.use_cache);
    c.requests_per_minute = j.value("requests_per_minute", c.requests_per_minute);
    if (j.contains("retry")) {
      const auto& r = j["retry"];
      c.retry.max_retries = r.value("max_retries", c.retry.max_retries);
      c.retry.base_delay = std::chrono::milliseconds(r.value("base_delay_ms", c.retry.base_delay.count()));
      c.retry.max_delay = std::chrono::milliseconds(r.value("max_delay_ms", c.retry.max_delay.count()));
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ConfigError, std::string("malformed run config: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(ErrorCode::ConfigError, e.what());
  }
  if (c.workers < 1) fail(ErrorCode::ConfigError, "workers must be at least 1");
  if (c.temperature < 0) fail(ErrorCode::ConfigError, "temperature must be >= 0");
  if (c.max_tokens < 1) fail(ErrorCode::ConfigError, "max_tokens must be positive");
}

std::string_view to_string(RunStatus s) {
  switch (s) {
    case RunStatus::Running: return "running";
    case RunStatus::Complete: return "complete";
    case RunStatus::Failed: return "failed";
  }
  return "running";
}

RunStatus parse_run_status(std::string_view text) {
  if (text == "running") return RunStatus::Running;
  if (text == "complete") return RunStatus::Complete;
  if (text == "failed") return RunStatus::Failed;
  fail(ErrorCode::StorageFailure, "unknown run status '" + std::string(text) + "'");
}

std::string make_run_id(const RunConfig& config, const std::string& corpus_digest) {
  json key{{"corpus", corpus_digest}, {"config", config.identity()}};
  return sha256_hex(key.dump()).substr(0, 16);
}

json report_json(const RunResult& r) {
  json skipped = json::array();
  for (const auto& s : r.skipped) skipped.push_back({{"statement_id", s.statement_id}, {"reason", s.reason}});
  json failed = json::array();
  for (const auto& f : r.failed) {
    failed.push_back({{"statement_id", f.statement_id}, {"code", f.code}, {"message", f.message}});
  }
  return json{{"run_id", r.run_id},
              {"strategy", std::string(to_string(r.strategy))},
              {"experiment", std::string(display_name(r.strategy))},
              {"corpus_digest", r.corpus_digest},
              {"status", std::string(to_string(r.status))},
              {"n_records", r.records.size()},
              {"n_unlabeled", r.unlabeled},
              {"skipped", skipped},
              {"failed", failed},
              {"metrics", r.metrics ? to_json(*r.metrics) : json(nullptr)}};
}

std::string report_text(const RunResult& r) {
  std::string out;
  if (r.metrics) {
    ReportRow row{std::string(display_name(r.strategy)), *r.metrics};
    out += render_metrics_table(std::span<const ReportRow>(&row, 1));
  } else {
    out += std::string(display_name(r.strategy)) + ": no scorable records\n";
  }
  out += fmt::format("records: {}  skipped: {}  failed: {}  unlabeled: {}\n", r.records.size(),
                     r.skipped.size(), r.failed.size(), r.unlabeled);
  return out;
}

}  // namespace clarify
