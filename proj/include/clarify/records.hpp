#pragma once

// Run-level value types shared by the pipeline, the run store and reports.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clarify/dataset.hpp"
#include "clarify/domain.hpp"
#include "clarify/gateway.hpp"
#include "clarify/metrics.hpp"
#include "clarify/prompts.hpp"

namespace clarify {

enum class Strategy {
  BaselineEnabled,
  BaselineDisabled,
  GenericQA,
  CategoryQA,
  CategoryQADisabled,
  FillBlank,
  Oracle,
};

inline constexpr Strategy kAllStrategies[] = {
    Strategy::BaselineDisabled, Strategy::BaselineEnabled, Strategy::FillBlank,
    Strategy::GenericQA,        Strategy::CategoryQA,      Strategy::CategoryQADisabled,
    Strategy::Oracle};

// "baseline-enabled", "category-qa", ...
std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view text);
// Row label used in metric tables.
std::string_view display_name(Strategy s);
bool needs_article(Strategy s);

enum class RouterKind { None, Llm, Heuristic };

std::string_view to_string(RouterKind r);
RouterKind parse_router(std::string_view text);

using HeuristicRouteMap = std::map<Category, RouteValue>;
// A and E to the user; B, C, F and G to web retrieval.
HeuristicRouteMap default_heuristic_routes();

struct TranscriptEntry {
  std::string digest;
  std::string reply;

  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

using Transcript = std::vector<TranscriptEntry>;

struct TokenLengths {
  std::size_t question = 0;
  std::size_t answer = 0;

  friend bool operator==(const TokenLengths&, const TokenLengths&) = default;
};

struct StatementRecord {
  std::string statement_id;
  Strategy strategy = Strategy::BaselineEnabled;
  std::optional<std::string> question;
  std::optional<std::vector<Category>> question_categories;
  std::optional<Route> route;
  std::optional<std::string> answer;
  std::optional<std::string> context_block;
  VeracityScore score;
  std::optional<TokenLengths> token_lengths;
  Transcript transcript;

  friend bool operator==(const StatementRecord&, const StatementRecord&) = default;
};

void to_json(nlohmann::json& j, const StatementRecord& r);
void from_json(const nlohmann::json& j, StatementRecord& r);

struct SkippedStatement {
  std::string statement_id;
  std::string reason;

  friend bool operator==(const SkippedStatement&, const SkippedStatement&) = default;
};

struct FailedStatement {
  std::string statement_id;
  std::string code;
  std::string message;

  friend bool operator==(const FailedStatement&, const FailedStatement&) = default;
};

struct RunConfig {
  Strategy strategy = Strategy::CategoryQA;
  std::string corpus_path;
  SchemaConfig schema;
  std::optional<std::string> annotations_path;
  std::set<PossibilityLabel> possibility = {PossibilityLabel::Possible, PossibilityLabel::Hard,
                                            PossibilityLabel::Impossible};
  // "fixture:<path>" or "remote".
  std::string backend = "remote";
  std::string model = "gpt-4";
  double temperature = 0.0;
  int max_tokens = 512;
  RouterKind router = RouterKind::Heuristic;
  HeuristicRouteMap heuristic_routes = default_heuristic_routes();
  bool enforce_routing = false;
  int workers = 4;
  AbstainPolicy policy = AbstainPolicy::AbstainAsError;
  ParseMode parse_mode = ParseMode::Lenient;
  std::string store_dir;  // empty: nothing persisted
  std::string cache_dir;  // empty: <store_dir>/cache when a store is set
  bool use_cache = true;
  double requests_per_minute = 0;
  RetryPolicy retry;

  // Fields that change results; the run id hashes exactly these.
  nlohmann::json identity() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
// Unknown keys are rejected; missing keys keep defaults. Throws ConfigError.
void from_json(const nlohmann::json& j, RunConfig& c);

enum class RunStatus { Running, Complete, Failed };

std::string_view to_string(RunStatus s);
RunStatus parse_run_status(std::string_view text);

struct RunResult {
  std::string run_id;
  Strategy strategy = Strategy::BaselineEnabled;
  std::string corpus_digest;
  nlohmann::json config;
  std::vector<StatementRecord> records;  // corpus order
  std::vector<SkippedStatement> skipped;
  std::vector<FailedStatement> failed;
  std::size_t unlabeled = 0;  // records whose statement has no verdict
  std::optional<MetricsReport> metrics;
  RunStatus status = RunStatus::Running;
  std::string started;
  std::string finished;
};

// Deterministic projection (no timestamps): run id, strategy, counts,
// skipped/failed lists and metrics.
nlohmann::json report_json(const RunResult& r);
std::string report_text(const RunResult& r);

// Content-addressed run id for (strategy, corpus, result-relevant config).
std::string make_run_id(const RunConfig& config, const std::string& corpus_digest);

}  // namespace clarify
