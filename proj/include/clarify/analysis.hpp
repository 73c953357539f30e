#pragma once

// Word and n-gram frequency analysis over model replies, and seed-lexicon
// expansion by embedding cosine similarity.

#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace clarify {

// Tokenization pipeline, applied per whitespace-delimited chunk:
//   1. lowercase    ASCII, Latin-1, Greek and Cyrillic capitals
//   2. punctuation  hyphens and dashes between characters split the chunk;
//                   every other punctuation character is deleted
//                   ("It's the U.S." -> its, the, us)
//   3. stopwords    tokens in the (lowercase) list are dropped
// Whitespace includes the Unicode space separators. Empty tokens vanish.
struct TokenizerConfig {
  bool lowercase = true;
  bool strip_punctuation = true;
  std::set<std::string> stopwords;
};

std::vector<std::string> tokenize(std::string_view text, const TokenizerConfig& config = {});

struct FrequencyEntry {
  std::string term;
  std::size_t count = 0;

  friend bool operator==(const FrequencyEntry&, const FrequencyEntry&) = default;
};

// Sorted by count descending, then term ascending.
struct FrequencyTable {
  std::vector<FrequencyEntry> entries;
  int n = 1;
  std::size_t documents = 0;
};

// Per-occurrence counts of contiguous n-grams (tokens joined by a single
// space) within each document. Throws InvalidN unless n is 1 or 2, and
// InvalidArgument when top_k is 0.
FrequencyTable ngram_frequencies(std::span<const std::string> documents, int n, std::size_t top_k,
                                 const TokenizerConfig& config = {});

class EmbeddingStore {
 public:
  // Text vectors: "word v1 ... vN" per line. An optional "<count> <dim>"
  // header line is skipped. Dimension comes from the first vector line and
  // every other line must match it. With `lowercase`, keys are lowercased
  // and the first occurrence of a folded key wins. Throws FileUnreadable or
  // MalformedRow.
  static EmbeddingStore load(const std::filesystem::path& path, bool lowercase = true);

  EmbeddingStore() = default;
  EmbeddingStore(std::size_t dimension, bool lowercase);
  // Throws InvalidArgument on a dimension mismatch.
  void add(std::string word, std::span<const float> vec);

  std::optional<std::span<const float>> find(std::string_view word) const;
  const std::vector<std::string>& vocabulary() const { return words_; }
  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool lowercase() const { return lowercase_; }

 private:
  std::size_t dim_ = 0;
  bool lowercase_ = true;
  std::vector<std::string> words_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> index_;
};

// 0 when either vector is all zeros.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

struct LexiconEntry {
  std::string word;
  double similarity = 0;  // max over seeds; 1.0 for the seeds themselves
};

struct Lexicon {
  std::vector<std::string> seed;
  std::vector<LexiconEntry> expanded;  // seeds first, then by similarity desc
  double threshold = 0.5;
  std::vector<std::string> missing_seeds;  // seeds absent from the store

  bool contains(std::string_view word) const;
};

// Every store word whose cosine similarity to some present seed is strictly
// above `threshold` joins the lexicon. Throws EmptySeed, or InvalidArgument
// for a threshold outside [0, 1].
Lexicon expand_seed_lexicon(std::span<const std::string> seed, const EmbeddingStore& store,
                            double threshold);

// Unigram counts restricted to lexicon words.
FrequencyTable uncertainty_term_frequencies(std::span<const std::string> documents,
                                            const Lexicon& lexicon, std::size_t top_k,
                                            const TokenizerConfig& config = {});

// The 19-word baseline list of words signalling missing information.
const std::vector<std::string>& default_seed_words();

std::string render_frequency_table(const FrequencyTable& table, std::string_view term_header);
std::string frequency_csv(const FrequencyTable& table, std::string_view term_header);

}  // namespace clarify
