#pragma once

// JSON request/response operations behind the C API and the CLI. Every
// response carries a "text" member with a human-readable rendering.

#include <nlohmann/json.hpp>

#include "clarify/pipeline.hpp"

namespace clarify {

// Loads the corpus, runs the strategy and returns report_json plus
// {"text", "store_dir"}. Persists to config.store_dir when set.
nlohmann::json run_command(const RunConfig& config, ProgressFn progress = {});

// Documents for text analysis, from one of:
//   "documents": ["...", ...]
//   "input": path   .jsonl -> string member `field` (default "text") per line,
//                   .json  -> array of strings, otherwise one document per
//                   non-blank line
//   "store_dir" + "run_id": record member `field` ("question" by default;
//                   also "answer", "context_block" or "reply" for every
//                   transcript reply)
std::vector<std::string> load_documents(const nlohmann::json& request);

// {"kind": "ngrams" | "lexicon" | "routing-share" | "category-accuracy", ...}
//   ngrams             n (1), top (20), lowercase, strip_punctuation,
//                      stopwords, plus a document source
//   lexicon            embeddings (path), seeds (array; default list when
//                      absent), threshold (0.5), top (20), plus an optional
//                      document source for term counts
//   routing-share      store_dir + run_id, or records (a records.jsonl path)
//   category-accuracy  corpus, schema, annotations, filter ("all" or one
//                      filter), predictions from store_dir + run_id or a
//                      predictions CSV (statement_id,category_letter)
// Throws ConfigError for unknown kinds or malformed requests.
nlohmann::json analyze_command(const nlohmann::json& request);

// {"store_dir", "run_ids": [...]} (all stored runs when run_ids is absent)
// -> {"runs": [report_json...], "text": metrics table}.
nlohmann::json report_command(const nlohmann::json& request);

}  // namespace clarify
