#include "clarify/analysis.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <map>

#include "clarify/domain.hpp"
#include "clarify/error.hpp"
#include "clarify/text.hpp"

namespace clarify {

namespace {

bool is_space(char32_t c) {
  return c == ' ' || (c >= 0x09 && c <= 0x0D) || c == 0x85 || c == 0xA0 || c == 0x1680 ||
         (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F ||
         c == 0x205F || c == 0x3000;
}

bool is_dash(char32_t c) { return c == '-' || (c >= 0x2010 && c <= 0x2015) || c == 0x2212; }

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
           (c >= 0x7B && c <= 0x7E);
  }
  return c == 0xA1 || c == 0xA7 || c == 0xAB || c == 0xB6 || c == 0xB7 || c == 0xBB ||
         c == 0xBF || (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) ||
         (c >= 0x3001 && c <= 0x3003) || (c >= 0x3008 && c <= 0x3011) || c == 0x2212 ||
         (c >= 0xFF01 && c <= 0xFF0F);
}

char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 32;
  if ((c >= 0xC0 && c <= 0xDE) && c != 0xD7) return c + 32;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 32;
  if (c >= 0x410 && c <= 0x42F) return c + 32;
  if (c >= 0x400 && c <= 0x40F) return c + 80;
  return c;
}

std::string lower_utf8(std::string_view word) {
  std::string out;
  for (auto cp : decode_utf8(word)) append_utf8(out, to_lower(cp));
  return out;
}

FrequencyTable finish(std::map<std::string, std::size_t> counts, int n, std::size_t docs,
                      std::size_t top_k) {
  FrequencyTable t;
  t.n = n;
  t.documents = docs;
  t.entries.reserve(counts.size());
  for (auto& [term, count] : counts) t.entries.push_back({term, count});
  // std::map iteration is already term-ascending; stable sort keeps it for ties.
  std::stable_sort(t.entries.begin(), t.entries.end(),
                   [](const auto& a, const auto& b) { return a.count > b.count; });
  if (t.entries.size() > top_k) t.entries.resize(top_k);
  return t;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (current.empty()) return;
    if (!config.stopwords.contains(current)) tokens.push_back(current);
    current.clear();
  };
  const auto cps = decode_utf8(text);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    char32_t c = cps[i];
    if (is_space(c)) {
      flush();
      continue;
    }
    if (config.lowercase) c = to_lower(c);
    if (config.strip_punctuation && is_punct(c)) {
      if (is_dash(c)) flush();
      continue;
    }
    append_utf8(current, c);
  }
  flush();
  return tokens;
}

FrequencyTable ngram_frequencies(std::span<const std::string> documents, int n, std::size_t top_k,
                                 const TokenizerConfig& config) {
  if (n != 1 && n != 2) fail(ErrorCode::InvalidN, fmt::format("n must be 1 or 2, got {}", n));
  if (top_k == 0) fail(ErrorCode::InvalidArgument, "top_k must be positive");
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : documents) {
    auto tokens = tokenize(doc, config);
    if (tokens.size() < static_cast<std::size_t>(n)) continue;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      if (n == 1) ++counts[tokens[i]];
      else ++counts[tokens[i] + " " + tokens[i + 1]];
    }
  }
  return finish(std::move(counts), n, documents.size(), top_k);
}

// ---------------------------------------------------------------------------
// Embeddings

EmbeddingStore::EmbeddingStore(std::size_t dimension, bool lowercase)
    : dim_(dimension), lowercase_(lowercase) {}

void EmbeddingStore::add(std::string word, std::span<const float> vec) {
  if (vec.size() != dim_) {
    fail(ErrorCode::InvalidArgument,
         fmt::format("vector for '{}' has dimension {}, expected {}", word, vec.size(), dim_));
  }
  if (lowercase_) word = lower_utf8(word);
  if (index_.contains(word)) return;
  index_.emplace(word, words_.size());
  words_.push_back(std::move(word));
  data_.insert(data_.end(), vec.begin(), vec.end());
}

std::optional<std::span<const float>> EmbeddingStore::find(std::string_view word) const {
  auto key = lowercase_ ? lower_utf8(word) : std::string(word);
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return std::span<const float>(data_).subspan(it->second * dim_, dim_);
}

EmbeddingStore EmbeddingStore::load(const std::filesystem::path& path, bool lowercase) {
  const auto data = read_file(path);
  EmbeddingStore store(0, lowercase);
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::vector<float> vec;
  while (pos < data.size()) {
    auto nl = data.find('\n', pos);
    std::string_view line(data.data() + pos, (nl == std::string::npos ? data.size() : nl) - pos);
    pos = nl == std::string::npos ? data.size() : nl + 1;
    ++line_no;
    std::vector<std::string_view> fields;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
      auto start = i;
      while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
      if (i > start) fields.push_back(line.substr(start, i - start));
    }
    if (fields.empty()) continue;
    if (store.dim_ == 0 && store.words_.empty() && fields.size() == 2) {
      std::size_t a = 0, b = 0;
      auto r1 = std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), a);
      auto r2 = std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), b);
      if (r1.ec == std::errc() && r2.ec == std::errc() &&
          r1.ptr == fields[0].data() + fields[0].size() &&
          r2.ptr == fields[1].data() + fields[1].size()) {
        continue;  // "<count> <dim>" header
      }
    }
    if (fields.size() < 2) {
      throw RowError(ErrorCode::MalformedRow, line_no, "vector line has no components");
    }
    if (store.dim_ == 0) store.dim_ = fields.size() - 1;
    if (fields.size() - 1 != store.dim_) {
      throw RowError(ErrorCode::MalformedRow, line_no,
                     fmt::format("expected {} components, got {}", store.dim_, fields.size() - 1));
    }
    vec.clear();
    for (std::size_t k = 1; k < fields.size(); ++k) {
      float v = 0;
      auto r = std::from_chars(fields[k].data(), fields[k].data() + fields[k].size(), v);
      if (r.ec != std::errc() || r.ptr != fields[k].data() + fields[k].size()) {
        throw RowError(ErrorCode::MalformedRow, line_no,
                       "bad component '" + std::string(fields[k]) + "'");
      }
      vec.push_back(v);
    }
    store.add(std::string(fields[0]), vec);
  }
  return store;
}

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

bool Lexicon::contains(std::string_view word) const {
  auto key = lower_utf8(word);
  return std::any_of(expanded.begin(), expanded.end(),
                     [&](const auto& e) { return lower_utf8(e.word) == key; });
}

Lexicon expand_seed_lexicon(std::span<const std::string> seed, const EmbeddingStore& store,
                            double threshold) {
  if (seed.empty()) fail(ErrorCode::EmptySeed, "seed list is empty");
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    fail(ErrorCode::InvalidArgument, fmt::format("threshold {} outside [0, 1]", threshold));
  }
  Lexicon lex;
  lex.threshold = threshold;
  std::vector<std::span<const float>> seed_vecs;
  std::set<std::string> seen;
  for (const auto& raw : seed) {
    auto w = store.lowercase() ? lower_utf8(raw) : raw;
    if (!seen.insert(w).second) continue;
    lex.seed.push_back(w);
    lex.expanded.push_back({w, 1.0});
    if (auto v = store.find(w)) seed_vecs.push_back(*v);
    else lex.missing_seeds.push_back(w);
  }

  std::vector<LexiconEntry> found;
  for (const auto& word : store.vocabulary()) {
    if (seen.contains(word)) continue;
    auto v = *store.find(word);
    double best = -1.0;
    for (const auto& s : seed_vecs) best = std::max(best, cosine_similarity(v, s));
    if (best > threshold) found.push_back({word, best});
  }
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) {
    return a.similarity != b.similarity ? a.similarity > b.similarity : a.word < b.word;
  });
  lex.expanded.insert(lex.expanded.end(), found.begin(), found.end());
  return lex;
}

FrequencyTable uncertainty_term_frequencies(std::span<const std::string> documents,
                                            const Lexicon& lexicon, std::size_t top_k,
                                            const TokenizerConfig& config) {
  if (top_k == 0) fail(ErrorCode::InvalidArgument, "top_k must be positive");
  std::set<std::string> members;
  for (const auto& e : lexicon.expanded) members.insert(lower_utf8(e.word));
  std::map<std::string, std::size_t> counts;
  for (const auto& doc : documents) {
    for (const auto& tok : tokenize(doc, config)) {
      if (members.contains(lower_utf8(tok))) ++counts[tok];
    }
  }
  return finish(std::move(counts), 1, documents.size(), top_k);
}

const std::vector<std::string>& default_seed_words() {
  static const std::vector<std::string> words = {
      "context",     "detail",    "evidence",   "specification", "clarification",
      "assumption",  "reference", "framework",  "basis",         "criterion",
      "data",        "premise",   "ambiguous",  "vague",         "incomplete",
      "generalized", "unsubstantiated", "indeterminate", "specific"};
  return words;
}

std::string render_frequency_table(const FrequencyTable& table, std::string_view term_header) {
  std::size_t width = term_header.size();
  for (const auto& e : table.entries) width = std::max(width, e.term.size());
  std::string out = fmt::format("{:<{}}  {:>9}\n", term_header, width, "Frequency");
  for (const auto& e : table.entries) out += fmt::format("{:<{}}  {:>9}\n", e.term, width, e.count);
  return out;
}

std::string frequency_csv(const FrequencyTable& table, std::string_view term_header) {
  std::string out = std::string(term_header) + ",frequency\n";
  for (const auto& e : table.entries) out += csv_escape(e.term) + "," + std::to_string(e.count) + "\n";
  return out;
}

}  // namespace clarify
