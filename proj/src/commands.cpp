#include "clarify/commands.hpp"

#include <fmt/format.h>

#include "clarify/analysis.hpp"
#include "clarify/error.hpp"
#include "clarify/store.hpp"
#include "clarify/text.hpp"

namespace clarify {

using nlohmann::json;

namespace {

std::string required_string(const json& req, const char* key) {
  if (!req.contains(key) || !req[key].is_string()) {
    fail(ErrorCode::ConfigError, std::string("request needs a string '") + key + "'");
  }
  return req[key].get<std::string>();
}

template <typename T>
T get_or(const json& req, const char* key, T fallback) {
  if (!req.contains(key) || req[key].is_null()) return fallback;
  try {
    return req[key].get<T>();
  } catch (const json::exception&) {
    fail(ErrorCode::ConfigError, std::string("request member '") + key + "' has the wrong type");
  }
}

TokenizerConfig tokenizer_from(const json& req) {
  TokenizerConfig cfg;
  cfg.lowercase = get_or(req, "lowercase", cfg.lowercase);
  cfg.strip_punctuation = get_or(req, "strip_punctuation", cfg.strip_punctuation);
  for (const auto& w : get_or(req, "stopwords", std::vector<std::string>{})) cfg.stopwords.insert(to_lower_ascii(w));
  return cfg;
}

std::vector<StatementRecord> records_from(const json& req) {
  if (req.contains("records")) {
    auto data = read_file(required_string(req, "records"));
    std::vector<StatementRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < data.size()) {
      auto nl = data.find('\n', pos);
      auto line = data.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
      pos = nl == std::string::npos ? data.size() : nl + 1;
      ++line_no;
      if (trim(line).empty()) continue;
      try {
        out.push_back(json::parse(line).get<StatementRecord>());
      } catch (const std::exception& e) {
        throw RowError(ErrorCode::MalformedRow, line_no, e.what());
      }
    }
    return out;
  }
  RunStore store(required_string(req, "store_dir"));
  return store.load_run(required_string(req, "run_id")).records;
}

std::string percent_cell(const CategoryTally& t) {
  return t.total ? fmt::format("{:.2f}", round2(t.percent())) : std::string("-");
}

json analyze_ngrams(const json& req) {
  auto docs = load_documents(req);
  int n = get_or(req, "n", 1);
  auto top = get_or<std::size_t>(req, "top", 20);
  auto table = ngram_frequencies(docs, n, top, tokenizer_from(req));
  json entries = json::array();
  for (const auto& e : table.entries) entries.push_back({{"term", e.term}, {"count", e.count}});
  auto header = n == 1 ? "Word" : "Bigram";
  return json{{"kind", "ngrams"},
              {"n", n},
              {"documents", table.documents},
              {"entries", entries},
              {"csv", frequency_csv(table, header)},
              {"text", render_frequency_table(table, header)}};
}

json analyze_lexicon(const json& req) {
  auto store = EmbeddingStore::load(required_string(req, "embeddings"), get_or(req, "lowercase", true));
  auto seeds = get_or(req, "seeds", default_seed_words());
  auto lexicon = expand_seed_lexicon(seeds, store, get_or(req, "threshold", 0.5));
  json expanded = json::array();
  for (const auto& e : lexicon.expanded) expanded.push_back({{"word", e.word}, {"similarity", e.similarity}});
  json out{{"kind", "lexicon"},
           {"threshold", lexicon.threshold},
           {"seed", lexicon.seed},
           {"missing_seeds", lexicon.missing_seeds},
           {"expanded", expanded}};
  std::string text = fmt::format("Lexicon ({} words, threshold {})\n", lexicon.expanded.size(), lexicon.threshold);
  for (const auto& e : lexicon.expanded) text += fmt::format("  {:<24} {:.4f}\n", e.word, e.similarity);
  if (!lexicon.missing_seeds.empty()) {
    text += "Seeds not in the embedding store:";
    for (const auto& w : lexicon.missing_seeds) text += " " + w;
    text += "\n";
  }
  bool has_docs = req.contains("documents") || req.contains("input") || req.contains("run_id");
  if (has_docs) {
    auto docs = load_documents(req);
    auto table = uncertainty_term_frequencies(docs, lexicon, get_or<std::size_t>(req, "top", 20), tokenizer_from(req));
    json entries = json::array();
    for (const auto& e : table.entries) entries.push_back({{"term", e.term}, {"count", e.count}});
    out["frequencies"] = entries;
    out["documents"] = table.documents;
    text += "\n" + render_frequency_table(table, "Word");
  }
  out["text"] = text;
  return out;
}

json analyze_routing_share(const json& req) {
  auto share = routing_share(routed_categories(records_from(req)));
  if (share.overall.total == 0) {
    fail(ErrorCode::NoEligibleStatements, "no records carry both a category and a route");
  }
  std::string text = fmt::format("{:<4}{:<44}{:>12}{:>8}\n", "", "Category", "User (%)", "n");
  for (const auto& [c, t] : share.per_category) {
    text += fmt::format("{:<4}{:<44}{:>12}{:>8}\n", std::string(1, letter_of(c)), category_name(c), percent_cell(t),
                        t.total);
  }
  text += fmt::format("{:<4}{:<44}{:>12}{:>8}\n", "", "Overall", percent_cell(share.overall), share.overall.total);
  auto out = to_json(share);
  out["kind"] = "routing-share";
  out["text"] = text;
  return out;
}

std::map<std::string, Category> predictions_from(const json& req) {
  std::map<std::string, Category> preds;
  if (req.contains("predictions")) {
    auto data = read_file(required_string(req, "predictions"));
    CsvReader reader(data);
    bool header = true;
    while (auto rec = reader.next()) {
      if (header) {
        header = false;
        if (!rec->fields.empty() && trim(rec->fields[0]) == "statement_id") continue;
      }
      if (rec->fields.size() == 1 && trim(rec->fields[0]).empty()) continue;
      if (rec->fields.size() != 2) throw RowError(ErrorCode::MalformedRow, rec->line, "expected 2 columns");
      auto letter = trim(rec->fields[1]);
      if (letter.size() != 1) {
        throw RowError(ErrorCode::InvalidCategoryLetter, rec->line, "bad category letter '" + letter + "'");
      }
      auto c = try_category_from_letter(letter[0]);
      if (!c) throw RowError(ErrorCode::InvalidCategoryLetter, rec->line, "bad category letter '" + letter + "'");
      preds[trim(rec->fields[0])] = *c;
    }
    return preds;
  }
  for (const auto& r : records_from(req)) {
    if (r.question_categories && !r.question_categories->empty()) preds[r.statement_id] = r.question_categories->front();
  }
  return preds;
}

json analyze_category_accuracy(const json& req) {
  RunConfig cfg;
  cfg.corpus_path = required_string(req, "corpus");
  cfg.schema = req.contains("schema") ? req["schema"].get<SchemaConfig>() : SchemaConfig::for_path(cfg.corpus_path);
  if (req.contains("annotations")) cfg.annotations_path = required_string(req, "annotations");
  auto corpus = load_run_corpus(cfg);
  auto preds = predictions_from(req);

  std::vector<AgreementFilter> filters;
  auto which = get_or<std::string>(req, "filter", "all");
  if (which == "all") {
    filters = {AgreementFilter::MatchAny, AgreementFilter::TwoOfThree, AgreementFilter::Unanimous};
  } else {
    filters = {parse_agreement_filter(which)};
  }

  json results = json::array();
  std::string text = fmt::format("{:<14}", "Filter");
  for (auto c : kAllCategories) text += fmt::format("{:>9}", std::string(1, letter_of(c)));
  text += fmt::format("{:>10}{:>8}\n", "Overall", "n");
  for (auto f : filters) {
    auto acc = category_accuracy(preds, corpus, f);
    results.push_back(to_json(acc));
    text += fmt::format("{:<14}", to_string(f));
    for (auto c : kAllCategories) {
      auto it = acc.per_category.find(c);
      text += fmt::format("{:>9}", it == acc.per_category.end() ? std::string("-") : percent_cell(it->second));
    }
    text += fmt::format("{:>10}{:>8}\n", percent_cell(acc.overall), acc.overall.total);
  }
  return json{{"kind", "category-accuracy"}, {"results", results}, {"text", text}};
}

}  // namespace

std::vector<std::string> load_documents(const json& req) {
  if (req.contains("documents")) return get_or(req, "documents", std::vector<std::string>{});
  std::vector<std::string> docs;
  if (req.contains("input")) {
    std::filesystem::path path = required_string(req, "input");
    auto data = read_file(path);
    auto ext = path.extension().string();
    if (ext == ".json") {
      try {
        return json::parse(data).get<std::vector<std::string>>();
      } catch (const json::exception& e) {
        fail(ErrorCode::MalformedRow, "'" + path.string() + "' is not a JSON array of strings: " + e.what());
      }
    }
    auto field = get_or<std::string>(req, "field", "text");
    std::size_t pos = 0, line_no = 0;
    while (pos < data.size()) {
      auto nl = data.find('\n', pos);
      auto line = data.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
      pos = nl == std::string::npos ? data.size() : nl + 1;
      ++line_no;
      if (trim(line).empty()) continue;
      if (ext != ".jsonl") {
        docs.push_back(line);
        continue;
      }
      try {
        auto j = json::parse(line);
        if (!j.contains(field) || !j[field].is_string()) {
          throw RowError(ErrorCode::MalformedRow, line_no, "no string member '" + field + "'");
        }
        docs.push_back(j[field].get<std::string>());
      } catch (const json::exception& e) {
        throw RowError(ErrorCode::MalformedRow, line_no, e.what());
      }
    }
    return docs;
  }
  if (req.contains("run_id") || req.contains("records")) {
    auto field = get_or<std::string>(req, "field", "question");
    for (const auto& r : records_from(req)) {
      if (field == "question" && r.question) docs.push_back(*r.question);
      else if (field == "answer" && r.answer) docs.push_back(*r.answer);
      else if (field == "context_block" && r.context_block) docs.push_back(*r.context_block);
      else if (field == "reply") {
        for (const auto& t : r.transcript) docs.push_back(t.reply);
      } else if (field != "question" && field != "answer" && field != "context_block") {
        fail(ErrorCode::ConfigError, "unknown record field '" + field + "'");
      }
    }
    return docs;
  }
  fail(ErrorCode::ConfigError, "no documents: give 'documents', 'input' or 'store_dir' + 'run_id'");
}

json analyze_command(const json& req) {
  if (!req.is_object()) fail(ErrorCode::ConfigError, "analyze request must be a JSON object");
  auto kind = required_string(req, "kind");
  if (kind == "ngrams") return analyze_ngrams(req);
  if (kind == "lexicon") return analyze_lexicon(req);
  if (kind == "routing-share") return analyze_routing_share(req);
  if (kind == "category-accuracy") return analyze_category_accuracy(req);
  fail(ErrorCode::ConfigError, "unknown analysis '" + kind + "'");
}

json run_command(const RunConfig& config, ProgressFn progress) {
  auto corpus = load_run_corpus(config);
  auto gateway = make_gateway(config);
  std::unique_ptr<RunStore> store;
  if (!config.store_dir.empty()) store = std::make_unique<RunStore>(config.store_dir);
  auto result = run_strategy(corpus, config, *gateway, store.get(), std::move(progress));
  auto out = report_json(result);
  out["text"] = report_text(result);
  out["store_dir"] = config.store_dir;
  return out;
}

json report_command(const json& req) {
  if (!req.is_object()) fail(ErrorCode::ConfigError, "report request must be a JSON object");
  RunStore store(required_string(req, "store_dir"));
  auto ids = get_or(req, "run_ids", store.list_runs());
  if (ids.empty()) fail(ErrorCode::UnknownRun, "no runs in '" + store.root().string() + "'");
  json runs = json::array();
  std::vector<ReportRow> rows;
  std::string notes;
  for (const auto& id : ids) {
    auto r = store.load_run(id);
    runs.push_back(report_json(r));
    if (r.metrics) {
      rows.push_back({std::string(display_name(r.strategy)), *r.metrics});
    } else {
      notes += fmt::format("{} ({}): no scorable records\n", id, display_name(r.strategy));
    }
  }
  std::string text = rows.empty() ? std::string() : render_metrics_table(rows);
  return json{{"runs", runs}, {"text", text + notes}};
}

}  // namespace clarify
