#pragma once

// Shared value types for claims, verdicts, missing-information categories
// and routing decisions.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace clarify {

enum class PossibilityLabel { Possible, Hard, Impossible };

std::string_view to_string(PossibilityLabel label);
// Case-insensitive; throws InvalidArgument.
PossibilityLabel parse_possibility(std::string_view text);

// Letter-coded taxonomy of missing information. There is no D.
enum class Category : char {
  Speaker = 'A',
  Location = 'B',
  TextualContext = 'C',
  NonTextualEvidence = 'E',
  DateTime = 'F',
  Other = 'G',
};

inline constexpr std::array<Category, 6> kAllCategories = {
    Category::Speaker,        Category::Location, Category::TextualContext,
    Category::NonTextualEvidence, Category::DateTime, Category::Other};

inline char letter_of(Category c) { return static_cast<char>(c); }
std::string_view category_name(Category c);
// Throws InvalidCategoryLetter for D or anything outside {A,B,C,E,F,G}.
Category category_from_letter(char letter);
std::optional<Category> try_category_from_letter(char letter) noexcept;

enum class GroundTruth { False, True };

std::string_view to_string(GroundTruth truth);

struct Verdict {
  GroundTruth value;
  std::string raw_label;

  friend bool operator==(const Verdict&, const Verdict&) = default;
};

// Lower-cased source label -> binary truth.
class VerdictMap {
 public:
  VerdictMap() = default;
  explicit VerdictMap(const std::map<std::string, GroundTruth>& entries);

  // {pants-fire, false, mostly-false} -> False; {half-true, mostly-true, true} -> True.
  static VerdictMap liar_default();

  void set(std::string_view label, GroundTruth value);
  const std::map<std::string, GroundTruth>& entries() const { return entries_; }

  friend bool operator==(const VerdictMap&, const VerdictMap&) = default;

 private:
  std::map<std::string, GroundTruth> entries_;
};

// Throws UnmappedLabel when raw_label is not a key (case-insensitive).
Verdict binarize_verdict(std::string_view raw_label, const VerdictMap& mapping);

struct VeracityScore {
  double snapped = 0.5;
  std::optional<double> raw;
  std::string reply_text;

  bool abstained() const { return snapped == 0.5; }
  friend bool operator==(const VeracityScore&, const VeracityScore&) = default;
};

// Nearest of {0, 0.5, 1}; the midpoints 0.25 and 0.75 go to 0.5.
// Throws OutOfRange outside [0, 1].
VeracityScore snap_score(double raw, std::string reply_text = {});

enum class RouteValue { UserQuery, WebRetrieval };
enum class RouteSource { LlmRouter, HeuristicRouter };

struct Route {
  RouteValue value;
  RouteSource source;

  friend bool operator==(const Route&, const Route&) = default;
};

std::string_view to_string(RouteValue v);
std::string_view to_string(RouteSource s);
RouteValue parse_route_value(std::string_view text);
RouteSource parse_route_source(std::string_view text);

struct CategoryAnnotation {
  std::string labeler;
  Category category;

  friend bool operator==(const CategoryAnnotation&, const CategoryAnnotation&) = default;
};

inline constexpr std::size_t kMaxAnnotations = 3;

struct Statement {
  std::string id;
  std::string text;
  PossibilityLabel possibility = PossibilityLabel::Possible;
  std::optional<Verdict> verdict;
  std::optional<std::string> article;
  std::vector<CategoryAnnotation> annotations;

  friend bool operator==(const Statement&, const Statement&) = default;
};

// Checks the Statement invariants (non-blank text, at most three annotations,
// distinct labelers). Throws InvalidArgument.
void validate(const Statement& s);

std::string trim(std::string_view text);
std::string to_lower_ascii(std::string_view text);
// Whitespace-delimited word count.
std::size_t count_words(std::string_view text);

}  // namespace clarify
