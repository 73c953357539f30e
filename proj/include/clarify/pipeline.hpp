#pragma once

// Uncertainty-resolution strategies: the individual clarify / route /
// simulate-user / verdict steps and the batch runner that applies one
// strategy across a corpus.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clarify/dataset.hpp"
#include "clarify/gateway.hpp"
#include "clarify/prompts.hpp"
#include "clarify/records.hpp"

namespace clarify {

class RunStore;

enum class QuestionMode { Generic, CategoryBased };
enum class VerdictMode { Enabled, Disabled };

struct QuestionResult {
  std::string question;
  std::optional<std::vector<Category>> categories;  // CategoryBased only
};

// Either a clarifying exchange or a free-form context block.
struct QaContext {
  std::string question;
  std::string answer;
};

struct VerdictContext {
  std::optional<QaContext> qa;
  std::optional<std::string> block;
};

struct PipelineOptions {
  std::string model = "gpt-4";
  double temperature = 0.0;
  int max_tokens = 512;
  RouterKind router = RouterKind::Heuristic;
  HeuristicRouteMap heuristic_routes = default_heuristic_routes();
  bool enforce_routing = false;
  ParseMode parse_mode = ParseMode::Lenient;

  static PipelineOptions from(const RunConfig& config);
};

class Pipeline {
 public:
  Pipeline(Gateway& gateway, PipelineOptions options);

  // Every completion issued is appended to `transcript`. A reply that fails
  // to parse is retried once with a format reminder appended to the prompt.
  QuestionResult step_question(const Statement& statement, QuestionMode mode, Transcript& transcript);

  // Llm renders the routing prompt (throws NoRouteFound); Heuristic maps the
  // primary category (throws MissingCategory without one).
  Route step_route(const Statement& statement, const std::string& question,
                   const std::optional<std::vector<Category>>& categories, RouterKind router,
                   Transcript& transcript);

  // Throws MissingArticle.
  std::string step_simulate_user(const Statement& statement, const std::string& question,
                                 Transcript& transcript);

  // Fill-in-the-blank context block extracted from the article. Throws
  // MissingArticle.
  std::string step_fill_blank(const Statement& statement, Transcript& transcript);

  // Throws NoScoreFound (or OutOfRange) once the retry is spent.
  VeracityScore step_verdict(const Statement& statement, const VerdictContext& context,
                             VerdictMode mode, Transcript& transcript);

  // Runs one statement through `strategy`.
  StatementRecord process(const Statement& statement, Strategy strategy);

  const PipelineOptions& options() const { return options_; }

 private:
  std::string complete(const std::string& prompt, TemplateId id, Transcript& transcript);

  Gateway& gateway_;
  PipelineOptions options_;
};

// Called after each statement finishes (successfully or not), from worker
// threads.
using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Processes every eligible statement with `config.workers` threads. Strategies
// that need an article skip article-less statements. Statements that fail
// are listed in RunResult::failed and the run continues. With a store, the
// run resumes from persisted records of an unfinished run with the same id
// and the final result is saved. Throws EmptyCorpus, or NoEligibleStatements
// when every statement is skipped.
RunResult run_strategy(const Corpus& corpus, const RunConfig& config, Gateway& gateway,
                       RunStore* store = nullptr, ProgressFn progress = {});

// Recomputes metrics for stored records against a corpus.
std::optional<MetricsReport> score_records(const std::vector<StatementRecord>& records,
                                           const Corpus& corpus, AbstainPolicy policy,
                                           std::size_t n_skipped, std::size_t* unlabeled = nullptr);

// Backend "fixture:<path>" replays a script; "remote" reads RemoteConfig from
// the environment. The cache lives in cache_dir, else <store_dir>/cache, else
// memory. Throws ConfigError.
std::shared_ptr<Gateway> make_gateway(const RunConfig& config);

// Loads config.corpus_path, attaches annotations and applies the possibility
// filter.
Corpus load_run_corpus(const RunConfig& config);

// (primary category, route) pairs from records that carry both.
std::vector<RoutedCategory> routed_categories(const std::vector<StatementRecord>& records);

}  // namespace clarify
