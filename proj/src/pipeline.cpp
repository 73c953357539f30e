#include "clarify/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include "clarify/error.hpp"
#include "clarify/store.hpp"
#include "clarify/text.hpp"

namespace clarify {

PipelineOptions PipelineOptions::from(const RunConfig& config) {
  PipelineOptions o;
  o.model = config.model;
  o.temperature = config.temperature;
  o.max_tokens = config.max_tokens;
  o.router = config.router;
  o.heuristic_routes = config.heuristic_routes;
  o.enforce_routing = config.enforce_routing;
  o.parse_mode = config.parse_mode;
  return o;
}

Pipeline::Pipeline(Gateway& gateway, PipelineOptions options)
    : gateway_(gateway), options_(std::move(options)) {}

std::string Pipeline::complete(const std::string& prompt, TemplateId id, Transcript& transcript) {
  CompletionRequest req;
  req.messages = {Message{Role::User, prompt}};
  req.model = options_.model;
  req.temperature = options_.temperature;
  req.max_tokens = options_.max_tokens;
  req.tag = std::string(to_string(id));
  auto reply = gateway_.complete(req);
  transcript.push_back({request_digest(req), reply.text});
  return reply.text;
}

namespace {

bool is_parse_error(ErrorCode c) {
  switch (c) {
    case ErrorCode::NoCategoryFound:
    case ErrorCode::InvalidCategoryLetter:
    case ErrorCode::NoRouteFound:
    case ErrorCode::NoScoreFound:
    case ErrorCode::OutOfRange:
      return true;
    default:
      return false;
  }
}

std::string with_reminder(const std::string& prompt, TemplateId id) {
  return prompt + "\n\n" + std::string(format_reminder(id));
}

}  // namespace

QuestionResult Pipeline::step_question(const Statement& statement, QuestionMode mode,
                                       Transcript& transcript) {
  if (trim(statement.text).empty()) fail(ErrorCode::InvalidArgument, "statement text is empty");
  if (mode == QuestionMode::Generic) {
    auto prompt = render(TemplateId::GenericQuestion, {{"statement", statement.text}});
    auto reply = trim(complete(prompt, TemplateId::GenericQuestion, transcript));
    if (reply.empty()) {
      reply = trim(complete(prompt, TemplateId::GenericQuestion, transcript));
      if (reply.empty()) fail(ErrorCode::InvalidArgument, "empty clarifying question");
    }
    return {reply, std::nullopt};
  }
  auto prompt = render(TemplateId::CategoryQuestion, {{"statement", statement.text}});
  auto reply = complete(prompt, TemplateId::CategoryQuestion, transcript);
  CategoryReply parsed;
  try {
    parsed = parse_category_reply(reply, options_.parse_mode);
  } catch (const Error& e) {
    if (!is_parse_error(e.code())) throw;
    reply = complete(with_reminder(prompt, TemplateId::CategoryQuestion), TemplateId::CategoryQuestion,
                     transcript);
    parsed = parse_category_reply(reply, options_.parse_mode);
  }
  return {parsed.question, parsed.categories};
}

Route Pipeline::step_route(const Statement& statement, const std::string& question,
                           const std::optional<std::vector<Category>>& categories, RouterKind router,
                           Transcript& transcript) {
  if (trim(question).empty()) fail(ErrorCode::InvalidArgument, "question is empty");
  if (router == RouterKind::Llm) {
    auto prompt = render(TemplateId::RouteDecision, {{"statement", statement.text}, {"question", question}});
    return parse_route_reply(complete(prompt, TemplateId::RouteDecision, transcript), options_.parse_mode);
  }
  if (router == RouterKind::Heuristic) {
    if (!categories || categories->empty()) {
      fail(ErrorCode::MissingCategory, "heuristic routing needs a category");
    }
    auto it = options_.heuristic_routes.find(categories->front());
    auto value = it != options_.heuristic_routes.end() ? it->second : RouteValue::WebRetrieval;
    return Route{value, RouteSource::HeuristicRouter};
  }
  fail(ErrorCode::InvalidArgument, "no router selected");
}

std::string Pipeline::step_simulate_user(const Statement& statement, const std::string& question,
                                         Transcript& transcript) {
  if (!statement.article) fail(ErrorCode::MissingArticle, "statement '" + statement.id + "' has no article");
  auto prompt = render(TemplateId::SimulatedUser,
                       {{"statement", statement.text}, {"question", question}, {"article", *statement.article}});
  return trim(complete(prompt, TemplateId::SimulatedUser, transcript));
}

std::string Pipeline::step_fill_blank(const Statement& statement, Transcript& transcript) {
  if (!statement.article) fail(ErrorCode::MissingArticle, "statement '" + statement.id + "' has no article");
  auto prompt = render(TemplateId::FillBlankExtract, {{"statement", statement.text}, {"article", *statement.article}});
  return trim(complete(prompt, TemplateId::FillBlankExtract, transcript));
}

VeracityScore Pipeline::step_verdict(const Statement& statement, const VerdictContext& context,
                                     VerdictMode mode, Transcript& transcript) {
  TemplateId id;
  Bindings b{{"statement", statement.text}};
  bool enabled = mode == VerdictMode::Enabled;
  if (context.qa) {
    id = enabled ? TemplateId::VeracityEnabledWithContext : TemplateId::VeracityDisabledWithContext;
    b["question"] = context.qa->question;
    b["context"] = context.qa->answer;
  } else if (context.block) {
    if (!enabled) fail(ErrorCode::InvalidArgument, "a context block needs the uncertainty-enabled verdict");
    id = TemplateId::VeracityEnabledWithBlock;
    b["context"] = *context.block;
  } else {
    id = enabled ? TemplateId::VeracityEnabled : TemplateId::VeracityDisabled;
  }
  auto prompt = render(id, b);
  auto reply = complete(prompt, id, transcript);
  try {
    return parse_score_reply(reply, options_.parse_mode);
  } catch (const Error& e) {
    if (!is_parse_error(e.code())) throw;
  }
  reply = complete(with_reminder(prompt, id), id, transcript);
  return parse_score_reply(reply, options_.parse_mode);
}

StatementRecord Pipeline::process(const Statement& statement, Strategy strategy) {
  StatementRecord r;
  r.statement_id = statement.id;
  r.strategy = strategy;
  auto& t = r.transcript;
  switch (strategy) {
    case Strategy::BaselineEnabled:
      r.score = step_verdict(statement, {}, VerdictMode::Enabled, t);
      break;
    case Strategy::BaselineDisabled:
      r.score = step_verdict(statement, {}, VerdictMode::Disabled, t);
      break;
    case Strategy::GenericQA:
    case Strategy::CategoryQA:
    case Strategy::CategoryQADisabled: {
      if (!statement.article) fail(ErrorCode::MissingArticle, "statement '" + statement.id + "' has no article");
      auto mode = strategy == Strategy::GenericQA ? QuestionMode::Generic : QuestionMode::CategoryBased;
      auto q = step_question(statement, mode, t);
      r.question = q.question;
      r.question_categories = q.categories;
      // Generic questions carry no category, so only the LLM router applies.
      bool can_route = options_.router == RouterKind::Llm ||
                       (options_.router == RouterKind::Heuristic && q.categories);
      if (can_route) r.route = step_route(statement, q.question, q.categories, options_.router, t);
      auto verdict_mode = strategy == Strategy::CategoryQADisabled ? VerdictMode::Disabled : VerdictMode::Enabled;
      if (options_.enforce_routing && r.route && r.route->value == RouteValue::WebRetrieval) {
        r.score = step_verdict(statement, {}, verdict_mode, t);
        break;
      }
      r.answer = step_simulate_user(statement, q.question, t);
      r.token_lengths = TokenLengths{count_words(q.question), count_words(*r.answer)};
      r.score = step_verdict(statement, {QaContext{q.question, *r.answer}, std::nullopt}, verdict_mode, t);
      break;
    }
    case Strategy::FillBlank:
      r.context_block = step_fill_blank(statement, t);
      r.score = step_verdict(statement, {std::nullopt, r.context_block}, VerdictMode::Enabled, t);
      break;
    case Strategy::Oracle:
      if (!statement.article) fail(ErrorCode::MissingArticle, "statement '" + statement.id + "' has no article");
      r.context_block = *statement.article;
      r.score = step_verdict(statement, {std::nullopt, r.context_block}, VerdictMode::Enabled, t);
      break;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Batch runs

std::optional<MetricsReport> score_records(const std::vector<StatementRecord>& records,
                                           const Corpus& corpus, AbstainPolicy policy,
                                           std::size_t n_skipped, std::size_t* unlabeled) {
  std::vector<VeracityScore> preds;
  std::vector<GroundTruth> truths;
  std::size_t missing = 0;
  for (const auto& r : records) {
    const auto* s = corpus.find(r.statement_id);
    if (!s || !s->verdict) {
      ++missing;
      continue;
    }
    preds.push_back(r.score);
    truths.push_back(s->verdict->value);
  }
  if (unlabeled) *unlabeled = missing;
  if (preds.empty()) return std::nullopt;
  if (policy == AbstainPolicy::ResolvedOnly &&
      std::all_of(preds.begin(), preds.end(), [](const VeracityScore& p) { return p.abstained(); })) {
    // Nothing left to score once abstentions are dropped; report resolution only.
    MetricsReport m;
    m.policy = policy;
    m.n_total = preds.size();
    m.n_skipped = n_skipped + missing;
    m.resolution = 0.0;
    return m;
  }
  return evaluate(preds, truths, policy, n_skipped + missing);
}

std::vector<RoutedCategory> routed_categories(const std::vector<StatementRecord>& records) {
  std::vector<RoutedCategory> out;
  for (const auto& r : records) {
    if (r.route && r.question_categories && !r.question_categories->empty()) {
      out.push_back({r.question_categories->front(), r.route->value});
    }
  }
  return out;
}

RunResult run_strategy(const Corpus& corpus, const RunConfig& config, Gateway& gateway, RunStore* store,
                       ProgressFn progress) {
  if (corpus.empty()) fail(ErrorCode::EmptyCorpus, "corpus has no statements");

  RunResult result;
  result.strategy = config.strategy;
  result.corpus_digest = corpus.digest();
  result.run_id = make_run_id(config, result.corpus_digest);
  result.config = config;
  result.started = now_iso8601();

  std::vector<const Statement*> eligible;
  for (const auto& s : corpus.statements()) {
    if (needs_article(config.strategy) && !s.article) {
      result.skipped.push_back({s.id, "no article; " + std::string(to_string(config.strategy)) + " needs one"});
    } else {
      eligible.push_back(&s);
    }
  }
  if (eligible.empty()) {
    fail(ErrorCode::NoEligibleStatements,
         "all " + std::to_string(corpus.size()) + " statements were skipped: strategy '" +
             std::string(to_string(config.strategy)) + "' needs an article and none has one");
  }

  std::map<std::string, StatementRecord> done;
  if (store) {
    for (auto& r : store->resumable_records(result.run_id)) {
      if (r.strategy == config.strategy && corpus.find(r.statement_id)) done[r.statement_id] = std::move(r);
    }
  }

  std::vector<const Statement*> pending;
  for (const auto* s : eligible) {
    if (!done.contains(s->id)) pending.push_back(s);
  }

  std::unique_ptr<RunStore::Writer> writer;
  if (store) {
    RunResult header = result;
    for (const auto* s : eligible) {
      if (auto it = done.find(s->id); it != done.end()) header.records.push_back(it->second);
    }
    writer = store->begin_run(header);
  }

  std::vector<std::optional<StatementRecord>> fresh(pending.size());
  std::vector<std::optional<FailedStatement>> failures(pending.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{done.size()};
  const std::size_t total = eligible.size();
  const auto options = PipelineOptions::from(config);

  auto work = [&] {
    Pipeline pipeline(gateway, options);
    for (std::size_t i = next++; i < pending.size(); i = next++) {
      const auto& s = *pending[i];
      try {
        auto record = pipeline.process(s, config.strategy);
        if (writer) writer->append(record);
        fresh[i] = std::move(record);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::StorageFailure) throw;
        failures[i] = FailedStatement{s.id, std::string(error_code_name(e.code())), e.what()};
      } catch (const std::exception& e) {
        failures[i] = FailedStatement{s.id, "Internal", e.what()};
      }
      if (progress) progress(++finished, total);
    }
  };

  const auto width = std::clamp<std::size_t>(static_cast<std::size_t>(std::max(config.workers, 1)), 1,
                                             std::max<std::size_t>(pending.size(), 1));
  if (width == 1) {
    work();
  } else {
    std::exception_ptr fatal;
    std::mutex fatal_mu;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < width; ++w) {
        pool.emplace_back([&] {
          try {
            work();
          } catch (...) {
            std::lock_guard lock(fatal_mu);
            if (!fatal) fatal = std::current_exception();
            next = pending.size();
          }
        });
      }
    }
    if (fatal) std::rethrow_exception(fatal);
  }

  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < pending.size(); ++i) slot[pending[i]->id] = i;
  for (const auto* s : eligible) {
    if (auto it = done.find(s->id); it != done.end()) {
      result.records.push_back(std::move(it->second));
      continue;
    }
    auto i = slot.at(s->id);
    if (fresh[i]) result.records.push_back(std::move(*fresh[i]));
    if (failures[i]) result.failed.push_back(std::move(*failures[i]));
  }

  result.metrics = score_records(result.records, corpus, config.policy,
                                 result.skipped.size() + result.failed.size(), &result.unlabeled);
  result.status = result.failed.empty() ? RunStatus::Complete : RunStatus::Failed;
  result.finished = now_iso8601();
  if (store) store->save_run(result);

  if (result.records.empty()) {
    const auto& first = result.failed.front();
    fail(ErrorCode::BackendFailure, "all " + std::to_string(result.failed.size()) +
                                        " statements failed; first: " + first.statement_id + ": " +
                                        first.message);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Construction from a run config

std::shared_ptr<Gateway> make_gateway(const RunConfig& config) {
  std::shared_ptr<Backend> backend;
  constexpr std::string_view kFixture = "fixture:";
  if (config.backend.starts_with(kFixture)) {
    auto path = config.backend.substr(kFixture.size());
    if (path.empty()) fail(ErrorCode::ConfigError, "fixture backend needs a path");
    try {
      backend = std::make_shared<ScriptedBackend>(ScriptFixture::load(path));
    } catch (const Error& e) {
      fail(ErrorCode::ConfigError, e.what());
    }
  } else if (config.backend == "remote") {
    backend = std::make_shared<RemoteBackend>(RemoteConfig::from_env());
  } else {
    fail(ErrorCode::ConfigError, "unknown backend '" + config.backend + "' (want fixture:<path> or remote)");
  }
  std::filesystem::path cache_dir = config.cache_dir;
  if (cache_dir.empty() && !config.store_dir.empty()) cache_dir = std::filesystem::path(config.store_dir) / "cache";
  GatewayOptions opts;
  opts.retry = config.retry;
  opts.requests_per_minute = config.requests_per_minute;
  opts.use_cache = config.use_cache;
  return std::make_shared<Gateway>(backend, std::make_shared<CompletionCache>(cache_dir), opts);
}

Corpus load_run_corpus(const RunConfig& config) {
  if (config.corpus_path.empty()) fail(ErrorCode::ConfigError, "no corpus path given");
  auto corpus = load_corpus(config.corpus_path, config.schema);
  if (config.annotations_path) corpus = attach_annotations(corpus, *config.annotations_path);
  return filter_by_possibility(corpus, config.possibility);
}

}  // namespace clarify
