// clarify: batch experiments, corpus analyses, stored-run reports and the
// session HTTP API, all through the C interface.

#include <pthread.h>
#include <signal.h>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "clarify/clarify.h"

using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitBackend = 4;

int exit_code(clarify_status status) {
  switch (status) {
    case CLARIFY_OK: return 0;
    case CLARIFY_ERR_ARGUMENT:
    case CLARIFY_ERR_CONFIG: return kExitConfig;
    case CLARIFY_ERR_DATA:
    case CLARIFY_ERR_NOT_FOUND: return kExitData;
    case CLARIFY_ERR_BACKEND: return kExitBackend;
    default: return 1;
  }
}

int report_failure(clarify_status status) {
  std::cerr << "error [" << clarify_last_error_code() << "]: " << clarify_last_error() << "\n";
  return exit_code(status);
}

struct CString {
  char* p = nullptr;
  ~CString() { clarify_free_string(p); }
  json parse() const { return json::parse(p); }
};

// Thrown for bad command-line input discovered after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::exception& e) {
    throw UsageError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::vector<std::string> read_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto start = line.find_first_not_of(" \t\r");
    if (start == std::string::npos || line[start] == '#') continue;
    auto end = line.find_last_not_of(" \t\r");
    words.push_back(line.substr(start, end - start + 1));
  }
  return words;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw UsageError("cannot write '" + path.string() + "'");
}

// --- run ------------------------------------------------------------------

struct RunArgs {
  std::string config;
  std::string strategy, corpus, backend, annotations, router, model, policy, store, cache_dir, parse_mode;
  std::vector<std::string> possibility;
  std::optional<int> workers;
  std::optional<double> rpm;
  bool enforce_routing = false;
  bool no_cache = false;
  std::string out_dir;
  bool json_output = false;
  bool progress = false;
};

void add_run(CLI::App& app, RunArgs& a) {
  auto* run = app.add_subcommand("run", "Run one resolution strategy over a corpus");
  run->add_option("--config", a.config, "Run config JSON file; flags override its keys");
  run->add_option("--strategy", a.strategy,
                  "baseline-enabled | baseline-disabled | generic-qa | category-qa | category-qa-disabled | "
                  "fill-blank | oracle");
  run->add_option("--corpus", a.corpus, "Corpus file (.csv or .jsonl)");
  run->add_option("--backend", a.backend, "fixture:<path> or remote");
  run->add_option("--annotations", a.annotations, "Category annotation CSV");
  run->add_option("--possibility", a.possibility, "Possibility labels to keep")->delimiter(',');
  run->add_option("--router", a.router, "none | llm | heuristic");
  run->add_option("--model", a.model, "Model name");
  run->add_option("--workers", a.workers, "Concurrent statements");
  run->add_option("--abstain-policy", a.policy, "abstain-as-error | resolved-only");
  run->add_option("--parse-mode", a.parse_mode, "lenient | strict");
  run->add_option("--store", a.store, "Run store directory");
  run->add_option("--cache-dir", a.cache_dir, "Completion cache directory");
  run->add_option("--requests-per-minute", a.rpm, "Backend rate limit");
  run->add_flag("--enforce-routing", a.enforce_routing, "Only ask the simulated user on user-routed statements");
  run->add_flag("--no-cache", a.no_cache, "Bypass the completion cache");
  run->add_option("--out", a.out_dir, "Directory for report.json and report.txt");
  run->add_flag("--json", a.json_output, "Print the JSON report instead of the table");
  run->add_flag("--progress", a.progress, "Print progress to stderr");
}

void on_progress(size_t done, size_t total, void*) {
  std::fprintf(stderr, "\r%zu/%zu statements", done, total);
  if (done == total) std::fputc('\n', stderr);
}

int cmd_run(const RunArgs& a) {
  json cfg = a.config.empty() ? json::object() : read_json_file(a.config);
  auto set = [&](const char* key, const std::string& v) {
    if (!v.empty()) cfg[key] = v;
  };
  set("strategy", a.strategy);
  set("corpus", a.corpus);
  set("backend", a.backend);
  set("annotations", a.annotations);
  set("router", a.router);
  set("model", a.model);
  set("abstain_policy", a.policy);
  set("parse_mode", a.parse_mode);
  set("store_dir", a.store);
  set("cache_dir", a.cache_dir);
  if (!a.possibility.empty()) cfg["possibility"] = a.possibility;
  if (a.workers) cfg["workers"] = *a.workers;
  if (a.rpm) cfg["requests_per_minute"] = *a.rpm;
  if (a.enforce_routing) cfg["enforce_routing"] = true;
  if (a.no_cache) cfg["use_cache"] = false;

  CString report;
  auto status = clarify_run(cfg.dump().c_str(), a.progress ? on_progress : nullptr, nullptr, &report.p);
  if (status != CLARIFY_OK) return report_failure(status);
  auto j = report.parse();
  auto text = j["text"].get<std::string>();
  j.erase("text");
  j.erase("store_dir");
  if (!a.out_dir.empty()) {
    std::filesystem::create_directories(a.out_dir);
    write_text(std::filesystem::path(a.out_dir) / "report.json", j.dump(2) + "\n");
    write_text(std::filesystem::path(a.out_dir) / "report.txt", text);
  }
  std::cout << (a.json_output ? j.dump(2) + "\n" : text);
  if (!a.json_output) std::cout << "run id: " << j["run_id"].get<std::string>() << "\n";
  for (const auto& s : j["skipped"]) {
    std::cerr << "skipped " << s["statement_id"].get<std::string>() << ": " << s["reason"].get<std::string>() << "\n";
  }
  for (const auto& f : j["failed"]) {
    std::cerr << "failed " << f["statement_id"].get<std::string>() << " [" << f["code"].get<std::string>()
              << "]: " << f["message"].get<std::string>() << "\n";
  }
  return 0;
}

// --- analyze --------------------------------------------------------------

struct SourceArgs {
  std::string input, store, run_id, records, field;
};

void add_source(CLI::App* app, SourceArgs& s, bool documents) {
  if (documents) {
    app->add_option("--input", s.input, "Replies file (.txt one per line, .jsonl, or .json array)");
    app->add_option("--field", s.field, "JSON-lines member, or record field for --run-id");
  }
  app->add_option("--store", s.store, "Run store directory");
  app->add_option("--run-id", s.run_id, "Stored run");
  app->add_option("--records", s.records, "records.jsonl path");
}

void apply_source(json& req, const SourceArgs& s) {
  if (!s.input.empty()) req["input"] = s.input;
  if (!s.store.empty()) req["store_dir"] = s.store;
  if (!s.run_id.empty()) req["run_id"] = s.run_id;
  if (!s.records.empty()) req["records"] = s.records;
  if (!s.field.empty()) req["field"] = s.field;
}

struct AnalyzeArgs {
  SourceArgs source;
  int n = 1;
  std::size_t top = 20;
  std::string stopwords, embeddings, seeds, corpus, annotations, predictions, filter = "all", csv_out;
  double threshold = 0.5;
  bool keep_case = false, keep_punctuation = false, json_output = false;
  std::string kind;
};

void add_analyze(CLI::App& app, AnalyzeArgs& a) {
  auto* analyze = app.add_subcommand("analyze", "Corpus and run analyses");
  analyze->require_subcommand(1);
  analyze->add_flag("--json", a.json_output, "Print JSON");

  auto* ngrams = analyze->add_subcommand("ngrams", "Word or bigram frequencies");
  add_source(ngrams, a.source, true);
  ngrams->add_option("--n", a.n, "1 or 2");
  ngrams->add_option("--top", a.top, "Rows to keep");
  ngrams->add_option("--stopwords", a.stopwords, "Stopword file, one per line");
  ngrams->add_flag("--keep-case", a.keep_case, "Do not lowercase");
  ngrams->add_flag("--keep-punctuation", a.keep_punctuation, "Do not strip punctuation");
  ngrams->add_option("--csv", a.csv_out, "Also write the table as CSV");
  ngrams->callback([&a] { a.kind = "ngrams"; });

  auto* lexicon = analyze->add_subcommand("lexicon", "Expand a seed lexicon and count its terms");
  add_source(lexicon, a.source, true);
  lexicon->add_option("--embeddings", a.embeddings, "Text word vectors")->required();
  lexicon->add_option("--seeds", a.seeds, "Seed word file (default: built-in list)");
  lexicon->add_option("--threshold", a.threshold, "Cosine similarity threshold");
  lexicon->add_option("--top", a.top, "Rows to keep");
  lexicon->callback([&a] { a.kind = "lexicon"; });

  auto* routing = analyze->add_subcommand("routing-share", "User-query share per missing-information category");
  add_source(routing, a.source, false);
  routing->callback([&a] { a.kind = "routing-share"; });

  auto* cat = analyze->add_subcommand("category-accuracy", "Predicted category against annotator labels");
  add_source(cat, a.source, false);
  cat->add_option("--corpus", a.corpus, "Corpus file")->required();
  cat->add_option("--annotations", a.annotations, "Annotation CSV");
  cat->add_option("--predictions", a.predictions, "Predictions CSV (statement_id,category_letter)");
  cat->add_option("--filter", a.filter, "all | match-any | two-of-three | unanimous");
  cat->callback([&a] { a.kind = "category-accuracy"; });
}

int cmd_analyze(const AnalyzeArgs& a) {
  json req{{"kind", a.kind}};
  apply_source(req, a.source);
  if (a.kind == "ngrams") {
    req["n"] = a.n;
    req["top"] = a.top;
    req["lowercase"] = !a.keep_case;
    req["strip_punctuation"] = !a.keep_punctuation;
    if (!a.stopwords.empty()) req["stopwords"] = read_word_list(a.stopwords);
  } else if (a.kind == "lexicon") {
    req["embeddings"] = a.embeddings;
    req["threshold"] = a.threshold;
    req["top"] = a.top;
    if (!a.seeds.empty()) req["seeds"] = read_word_list(a.seeds);
  } else if (a.kind == "category-accuracy") {
    req["corpus"] = a.corpus;
    req["filter"] = a.filter;
    if (!a.annotations.empty()) req["annotations"] = a.annotations;
    if (!a.predictions.empty()) req["predictions"] = a.predictions;
  }
  CString result;
  auto status = clarify_analyze(req.dump().c_str(), &result.p);
  if (status != CLARIFY_OK) return report_failure(status);
  auto j = result.parse();
  if (!a.csv_out.empty() && j.contains("csv")) write_text(a.csv_out, j["csv"].get<std::string>());
  auto text = j["text"].get<std::string>();
  j.erase("text");
  j.erase("csv");
  std::cout << (a.json_output ? j.dump(2) + "\n" : text);
  return 0;
}

// --- report ---------------------------------------------------------------

struct ReportArgs {
  std::string store;
  std::vector<std::string> run_ids;
  bool json_output = false;
};

void add_report(CLI::App& app, ReportArgs& a) {
  auto* report = app.add_subcommand("report", "Render stored runs as a metrics table");
  report->add_option("--store", a.store, "Run store directory")->required();
  report->add_option("--run-id", a.run_ids, "Runs to include (default: all)");
  report->add_flag("--json", a.json_output, "Print JSON");
}

int cmd_report(const ReportArgs& a) {
  json req{{"store_dir", a.store}};
  if (!a.run_ids.empty()) req["run_ids"] = a.run_ids;
  CString result;
  auto status = clarify_report(req.dump().c_str(), &result.p);
  if (status != CLARIFY_OK) return report_failure(status);
  auto j = result.parse();
  std::cout << (a.json_output ? j["runs"].dump(2) + "\n" : j["text"].get<std::string>());
  return 0;
}

// --- serve ----------------------------------------------------------------

struct ServeArgs {
  std::string config, backend, store, cache_dir, model, router;
  std::string host = "127.0.0.1";
  int port = 8080;
};

void add_serve(CLI::App& app, ServeArgs& a) {
  auto* serve = app.add_subcommand("serve", "Serve the clarification session API");
  serve->add_option("--config", a.config, "Engine config JSON file");
  serve->add_option("--backend", a.backend, "fixture:<path> or remote");
  serve->add_option("--store", a.store, "Directory for sessions and the cache");
  serve->add_option("--cache-dir", a.cache_dir, "Completion cache directory");
  serve->add_option("--model", a.model, "Model name");
  serve->add_option("--router", a.router, "llm | heuristic");
  serve->add_option("--host,--bind", a.host, "Bind address");
  serve->add_option("--port", a.port, "Port (0 picks a free one)");
}

int cmd_serve(const ServeArgs& a) {
  json cfg = a.config.empty() ? json::object() : read_json_file(a.config);
  if (!a.backend.empty()) cfg["backend"] = a.backend;
  if (!a.store.empty()) cfg["store_dir"] = a.store;
  if (!a.cache_dir.empty()) cfg["cache_dir"] = a.cache_dir;
  if (!a.model.empty()) cfg["model"] = a.model;
  if (!a.router.empty()) cfg["router"] = a.router;

  clarify_engine* engine = nullptr;
  auto status = clarify_engine_new(cfg.dump().c_str(), &engine);
  if (status != CLARIFY_OK) return report_failure(status);

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);
  std::jthread waiter([engine, signals] {
    int sig = 0;
    sigwait(&signals, &sig);
    clarify_serve_stop(engine);
  });

  int port = 0;
  json opts{{"host", a.host}, {"port", a.port}};
  status = clarify_serve_start(engine, opts.dump().c_str(), &port);
  if (status != CLARIFY_OK) {
    int code = report_failure(status);
    pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    clarify_engine_free(engine);
    return code;
  }
  std::cerr << "listening on http://" << a.host << ":" << port << "\n";
  waiter.join();
  clarify_engine_free(engine);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty resolution for claim verification"};
  app.set_version_flag("--version", std::string(clarify_version()));
  app.require_subcommand(1);

  RunArgs run_args;
  AnalyzeArgs analyze_args;
  ReportArgs report_args;
  ServeArgs serve_args;
  add_run(app, run_args);
  add_analyze(app, analyze_args);
  add_report(app, report_args);
  add_serve(app, serve_args);
  app.add_subcommand("templates", "Print the prompt template catalog as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (app.got_subcommand("run")) return cmd_run(run_args);
    if (app.got_subcommand("analyze")) return cmd_analyze(analyze_args);
    if (app.got_subcommand("report")) return cmd_report(report_args);
    if (app.got_subcommand("serve")) return cmd_serve(serve_args);
    if (app.got_subcommand("templates")) {
      CString catalog;
      auto status = clarify_template_catalog(&catalog.p);
      if (status != CLARIFY_OK) return report_failure(status);
      std::cout << catalog.parse().dump(2) << "\n";
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
