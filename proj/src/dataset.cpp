#include "clarify/dataset.hpp"

#include <chrono>
#include <fmt/format.h>
#include <fstream>
#include <map>

#include "clarify/error.hpp"
#include "clarify/json_io.hpp"
#include "clarify/text.hpp"

namespace clarify {

namespace {

// A raw row as column-name -> cell. JSON cells keep their JSON type.
using RawRow = std::map<std::string, json>;

std::optional<std::string> cell_string(const RawRow& row, const std::string& column) {
  if (column.empty()) return std::nullopt;
  auto it = row.find(column);
  if (it == row.end() || it->second.is_null()) return std::nullopt;
  if (it->second.is_string()) return it->second.get<std::string>();
  if (it->second.is_number_integer()) return std::to_string(it->second.get<long long>());
  return it->second.dump();
}

void check_utf8(const RawRow& row, std::size_t index) {
  for (const auto& [k, v] : row) {
    if (v.is_string() && !is_valid_utf8(v.get_ref<const std::string&>())) {
      throw RowError(ErrorCode::MalformedRow, index, "column '" + k + "' is not valid UTF-8");
    }
  }
}

Statement statement_from_row(const RawRow& row, std::size_t index, const SchemaConfig& schema) {
  const auto& cols = schema.columns;
  Statement s;
  auto id = cell_string(row, cols.id);
  if (!id || trim(*id).empty()) throw RowError(ErrorCode::MalformedRow, index, "missing id");
  s.id = trim(*id);
  auto text = cell_string(row, cols.text);
  if (!text || trim(*text).empty()) {
    throw RowError(ErrorCode::MalformedRow, index, "empty statement text");
  }
  s.text = *text;

  if (auto p = cell_string(row, cols.possibility); p && !trim(*p).empty()) {
    try {
      s.possibility = parse_possibility(*p);
    } catch (const Error& e) {
      throw RowError(ErrorCode::MalformedRow, index, e.what());
    }
  }

  if (!cols.verdict.empty()) {
    auto it = row.find(cols.verdict);
    if (it != row.end() && it->second.is_object()) {
      s.verdict = it->second.get<Verdict>();
    } else if (auto v = cell_string(row, cols.verdict); v && !trim(*v).empty()) {
      try {
        s.verdict = binarize_verdict(*v, schema.verdicts);
      } catch (const Error& e) {
        throw RowError(ErrorCode::UnmappedLabel, index, e.what());
      }
    }
  }

  if (auto a = cell_string(row, cols.article); a && !trim(*a).empty()) s.article = *a;

  if (auto it = row.find("annotations"); it != row.end() && it->second.is_array()) {
    try {
      s.annotations = it->second.get<std::vector<CategoryAnnotation>>();
      validate(s);
    } catch (const Error& e) {
      throw RowError(e.code(), index, e.what());
    } catch (const json::exception& e) {
      throw RowError(ErrorCode::MalformedRow, index, e.what());
    }
  }
  return s;
}

template <typename Emit>
void read_csv_rows(std::string_view data, Emit&& emit) {
  CsvReader reader(data);
  auto header = reader.next();
  if (!header) return;
  if (!header->fields.empty() && header->fields[0].starts_with("\xEF\xBB\xBF")) {
    header->fields[0].erase(0, 3);
  }
  std::size_t index = 0;
  for (;;) {
    ++index;
    std::optional<CsvRecord> rec;
    try {
      rec = reader.next();
    } catch (const RowError& e) {
      // An unterminated quote swallows the rest of the file.
      emit(index, std::nullopt, std::optional<RowError>(RowError(ErrorCode::MalformedRow, index, "unterminated quoted field")));
      return;
    }
    if (!rec) return;
    if (rec->fields.size() != header->fields.size()) {
      emit(index, std::nullopt,
           std::optional<RowError>(RowError(
               ErrorCode::MalformedRow, index,
               "expected " + std::to_string(header->fields.size()) + " fields, got " +
                   std::to_string(rec->fields.size()))));
      continue;
    }
    RawRow row;
    for (std::size_t i = 0; i < rec->fields.size(); ++i) row[header->fields[i]] = rec->fields[i];
    emit(index, std::optional<RawRow>(std::move(row)), std::optional<RowError>());
  }
}

template <typename Emit>
void read_jsonl_rows(std::string_view data, Emit&& emit) {
  std::size_t index = 0;
  std::size_t pos = 0;
  while (pos < data.size()) {
    auto nl = data.find('\n', pos);
    auto line = data.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? data.size() : nl + 1;
    ++index;
    if (trim(line).empty()) continue;
    if (!is_valid_utf8(line)) {
      emit(index, std::nullopt,
           std::optional<RowError>(RowError(ErrorCode::MalformedRow, index, "line is not valid UTF-8")));
      continue;
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      emit(index, std::nullopt, std::optional<RowError>(RowError(ErrorCode::MalformedRow, index, e.what())));
      continue;
    }
    if (!obj.is_object()) {
      emit(index, std::nullopt,
           std::optional<RowError>(RowError(ErrorCode::MalformedRow, index, "line is not a JSON object")));
      continue;
    }
    RawRow row;
    for (auto& [k, v] : obj.items()) row[k] = v;
    emit(index, std::optional<RawRow>(std::move(row)), std::optional<RowError>());
  }
}

}  // namespace

SchemaConfig SchemaConfig::for_path(const std::filesystem::path& path) {
  SchemaConfig s;
  auto ext = to_lower_ascii(path.extension().string());
  if (ext == ".jsonl" || ext == ".json" || ext == ".ndjson") s.format = CorpusFormat::JsonLines;
  return s;
}

void to_json(nlohmann::json& j, const SchemaConfig& s) {
  json verdicts = json::object();
  for (const auto& [k, v] : s.verdicts.entries()) verdicts[k] = v == GroundTruth::True;
  j = json{{"format", s.format == CorpusFormat::Csv ? "csv" : "jsonl"},
           {"columns",
            {{"id", s.columns.id},
             {"text", s.columns.text},
             {"possibility", s.columns.possibility},
             {"verdict", s.columns.verdict},
             {"article", s.columns.article}}},
           {"verdict_map", verdicts}};
}

void from_json(const nlohmann::json& j, SchemaConfig& s) {
  if (j.contains("format")) {
    auto f = to_lower_ascii(j["format"].get<std::string>());
    if (f == "csv") s.format = CorpusFormat::Csv;
    else if (f == "jsonl" || f == "json-lines" || f == "jsonlines") s.format = CorpusFormat::JsonLines;
    else fail(ErrorCode::ConfigError, "unknown corpus format '" + f + "'");
  }
  if (j.contains("columns")) {
    const auto& c = j["columns"];
    s.columns.id = c.value("id", s.columns.id);
    s.columns.text = c.value("text", s.columns.text);
    s.columns.possibility = c.value("possibility", s.columns.possibility);
    s.columns.verdict = c.value("verdict", s.columns.verdict);
    s.columns.article = c.value("article", s.columns.article);
  }
  if (s.columns.id.empty() || s.columns.text.empty()) {
    fail(ErrorCode::ConfigError, "schema must name the id and text columns");
  }
  if (j.contains("verdict_map")) {
    VerdictMap m;
    for (auto& [k, v] : j["verdict_map"].items()) {
      m.set(k, v.get<bool>() ? GroundTruth::True : GroundTruth::False);
    }
    s.verdicts = m;
  }
}

Corpus::Corpus(std::vector<Statement> statements, SourceMeta meta)
    : statements_(std::move(statements)), meta_(std::move(meta)) {
  index_.reserve(statements_.size());
  for (std::size_t i = 0; i < statements_.size(); ++i) {
    validate(statements_[i]);
    if (!index_.emplace(statements_[i].id, i).second) {
      fail(ErrorCode::DuplicateId, "duplicate statement id '" + statements_[i].id + "'");
    }
  }
}

const Statement* Corpus::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &statements_[it->second];
}

std::string Corpus::digest() const {
  std::string canonical;
  for (const auto& s : statements_) {
    canonical += json(s).dump();
    canonical += '\n';
  }
  return sha256_hex(canonical);
}

Corpus load_corpus(const std::filesystem::path& path, const SchemaConfig& schema,
                   bool collect_errors) {
  auto data = read_file(path);
  std::vector<Statement> statements;
  std::vector<RejectedRow> rejected;
  std::map<std::string, std::size_t> seen;
  std::size_t rows = 0;

  auto reject = [&](const RowError& e) {
    if (!collect_errors) throw e;
    rejected.push_back({e.row(), e.what()});
  };

  auto emit = [&](std::size_t index, std::optional<RawRow> row, std::optional<RowError> err) {
    ++rows;
    if (err) return reject(*err);
    try {
      check_utf8(*row, index);
      auto s = statement_from_row(*row, index, schema);
      if (auto [it, fresh] = seen.emplace(s.id, index); !fresh) {
        throw RowError(ErrorCode::DuplicateId, index,
                       "duplicate id '" + s.id + "' (first seen at row " +
                           std::to_string(it->second) + ")");
      }
      statements.push_back(std::move(s));
    } catch (const RowError& e) {
      reject(e);
    }
  };

  if (schema.format == CorpusFormat::Csv) read_csv_rows(data, emit);
  else read_jsonl_rows(data, emit);

  Corpus c(std::move(statements),
           SourceMeta{path.string(), schema.format, now_iso8601(), rows});
  c.rejected_ = std::move(rejected);
  return c;
}

Corpus filter_by_possibility(const Corpus& corpus, const std::set<PossibilityLabel>& keep) {
  std::vector<Statement> kept;
  for (const auto& s : corpus.statements()) {
    if (keep.contains(s.possibility)) kept.push_back(s);
  }
  return Corpus(std::move(kept), corpus.source_meta());
}

Corpus attach_annotations(const Corpus& corpus, const std::filesystem::path& labels_path) {
  auto data = read_file(labels_path);
  std::vector<Statement> statements = corpus.statements();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < statements.size(); ++i) index.emplace(statements[i].id, i);

  CsvReader reader(data);
  auto header = reader.next();
  if (!header) return Corpus(std::move(statements), corpus.source_meta());
  auto column = [&](std::string_view name) -> std::size_t {
    for (std::size_t i = 0; i < header->fields.size(); ++i) {
      if (trim(header->fields[i]) == name) return i;
    }
    fail(ErrorCode::MalformedRow, "annotation file lacks column '" + std::string(name) + "'");
  };
  const auto id_col = column("statement_id");
  const auto labeler_col = column("labeler_id");
  const auto letter_col = column("category_letter");

  std::size_t row = 0;
  while (auto rec = reader.next()) {
    ++row;
    if (rec->fields.size() != header->fields.size()) {
      throw RowError(ErrorCode::MalformedRow, row, "wrong field count");
    }
    auto id = trim(rec->fields[id_col]);
    auto labeler = trim(rec->fields[labeler_col]);
    auto letter = trim(rec->fields[letter_col]);
    auto it = index.find(id);
    if (it == index.end()) {
      throw RowError(ErrorCode::UnknownStatementId, row, "unknown statement id '" + id + "'");
    }
    if (letter.size() != 1 || !try_category_from_letter(letter[0])) {
      throw RowError(ErrorCode::InvalidCategoryLetter, row, "invalid category letter '" + letter + "'");
    }
    auto& s = statements[it->second];
    for (const auto& a : s.annotations) {
      if (a.labeler == labeler) {
        throw RowError(ErrorCode::DuplicateLabeler, row,
                       "labeler '" + labeler + "' already labelled '" + id + "'");
      }
    }
    if (s.annotations.size() >= kMaxAnnotations) {
      throw RowError(ErrorCode::MalformedRow, row, "more than 3 annotations for '" + id + "'");
    }
    s.annotations.push_back({labeler, category_from_letter(letter[0])});
  }
  return Corpus(std::move(statements), corpus.source_meta());
}

SchemaConfig canonical_schema() {
  SchemaConfig s;
  s.format = CorpusFormat::JsonLines;
  s.columns = ColumnMap{"id", "text", "possibility", "verdict", "article"};
  return s;
}

void write_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
  std::string out;
  for (const auto& s : corpus.statements()) {
    out += json(s).dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

void write_error_report(const std::vector<RejectedRow>& rows, const std::filesystem::path& path) {
  std::string out;
  for (const auto& r : rows) {
    out += json{{"row", r.row}, {"reason", r.reason}}.dump();
    out += '\n';
  }
  write_file_atomic(path, out);
}

}  // namespace clarify
