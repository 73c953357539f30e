#pragma once

// Loading LIAR-New-shaped corpora from CSV or JSON-lines, possibility
// filtering, and joining per-labeler category annotations.

#include <filesystem>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "clarify/domain.hpp"

namespace clarify {

enum class CorpusFormat { Csv, JsonLines };

struct ColumnMap {
  std::string id = "id";
  std::string text = "statement";
  // Optional columns; an empty name means "not present". Statements from a
  // corpus without a possibility column are labelled Possible.
  std::string possibility = "possibility";
  std::string verdict = "label";
  std::string article = "article";

  friend bool operator==(const ColumnMap&, const ColumnMap&) = default;
};

struct SchemaConfig {
  ColumnMap columns;
  CorpusFormat format = CorpusFormat::Csv;
  VerdictMap verdicts = VerdictMap::liar_default();

  // Picks the format from the file extension (.jsonl/.json -> JSON-lines).
  static SchemaConfig for_path(const std::filesystem::path& path);
  friend bool operator==(const SchemaConfig&, const SchemaConfig&) = default;
};

void to_json(nlohmann::json& j, const SchemaConfig& s);
// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, SchemaConfig& s);

struct RejectedRow {
  std::size_t row = 0;
  std::string reason;
};

struct SourceMeta {
  std::string path;
  CorpusFormat format = CorpusFormat::Csv;
  std::string loaded_at;  // ISO-8601 UTC
  std::size_t row_count = 0;
};

class Corpus {
 public:
  Corpus() = default;
  // Throws DuplicateId or InvalidArgument when a statement breaks an invariant.
  explicit Corpus(std::vector<Statement> statements, SourceMeta meta = {});

  const std::vector<Statement>& statements() const { return statements_; }
  const SourceMeta& source_meta() const { return meta_; }
  const std::vector<RejectedRow>& rejected() const { return rejected_; }
  std::size_t size() const { return statements_.size(); }
  bool empty() const { return statements_.empty(); }

  const Statement* find(const std::string& id) const;

  // Content hash over the statements, independent of source metadata.
  std::string digest() const;

  friend bool operator==(const Corpus& a, const Corpus& b) {
    return a.statements_ == b.statements_;
  }

 private:
  friend Corpus load_corpus(const std::filesystem::path&, const SchemaConfig&, bool);

  std::vector<Statement> statements_;
  std::unordered_map<std::string, std::size_t> index_;
  SourceMeta meta_;
  std::vector<RejectedRow> rejected_;
};

// When `collect_errors` is false the first bad row throws (RowError with
// MalformedRow, DuplicateId or UnmappedLabel). When true, bad rows are kept
// in Corpus::rejected() and loading continues. FileUnreadable always throws.
Corpus load_corpus(const std::filesystem::path& path, const SchemaConfig& schema,
                   bool collect_errors = false);

Corpus filter_by_possibility(const Corpus& corpus, const std::set<PossibilityLabel>& keep);

// Annotation CSV: statement_id,labeler_id,category_letter. Throws RowError
// carrying UnknownStatementId, InvalidCategoryLetter, DuplicateLabeler or
// MalformedRow.
Corpus attach_annotations(const Corpus& corpus, const std::filesystem::path& labels_path);

// JSON-lines in the canonical column names; load_corpus with
// canonical_schema() reads it back.
void write_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path);
SchemaConfig canonical_schema();

// One {"row", "reason"} object per line.
void write_error_report(const std::vector<RejectedRow>& rows, const std::filesystem::path& path);

}  // namespace clarify
