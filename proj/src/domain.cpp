#include "clarify/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "clarify/error.hpp"

namespace clarify {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnmappedLabel: return "UnmappedLabel";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::InvalidCategoryLetter: return "InvalidCategoryLetter";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::FileUnreadable: return "FileUnreadable";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::UnknownStatementId: return "UnknownStatementId";
    case ErrorCode::DuplicateLabeler: return "DuplicateLabeler";
    case ErrorCode::EmptyCorpus: return "EmptyCorpus";
    case ErrorCode::NoEligibleStatements: return "NoEligibleStatements";
    case ErrorCode::MissingArticle: return "MissingArticle";
    case ErrorCode::BackendExhausted: return "BackendExhausted";
    case ErrorCode::BackendFailure: return "BackendFailure";
    case ErrorCode::ScriptMiss: return "ScriptMiss";
    case ErrorCode::AuthFailure: return "AuthFailure";
    case ErrorCode::MissingSlot: return "MissingSlot";
    case ErrorCode::NoCategoryFound: return "NoCategoryFound";
    case ErrorCode::NoRouteFound: return "NoRouteFound";
    case ErrorCode::NoScoreFound: return "NoScoreFound";
    case ErrorCode::MissingCategory: return "MissingCategory";
    case ErrorCode::WrongState: return "WrongState";
    case ErrorCode::UnknownSession: return "UnknownSession";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::EmptyAfterFilter: return "EmptyAfterFilter";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::InvalidN: return "InvalidN";
    case ErrorCode::EmptySeed: return "EmptySeed";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::UnknownRun: return "UnknownRun";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

std::string trim(std::string_view text) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  std::size_t b = 0, e = text.size();
  while (b < e && is_space(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::size_t count_words(std::string_view text) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : text) {
    bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::string_view to_string(PossibilityLabel label) {
  switch (label) {
    case PossibilityLabel::Possible: return "possible";
    case PossibilityLabel::Hard: return "hard";
    case PossibilityLabel::Impossible: return "impossible";
  }
  return "possible";
}

PossibilityLabel parse_possibility(std::string_view text) {
  auto t = to_lower_ascii(trim(text));
  if (t == "possible") return PossibilityLabel::Possible;
  if (t == "hard") return PossibilityLabel::Hard;
  if (t == "impossible") return PossibilityLabel::Impossible;
  fail(ErrorCode::InvalidArgument, "unknown possibility label '" + std::string(text) + "'");
}

std::string_view category_name(Category c) {
  switch (c) {
    case Category::Speaker: return "Speaker or person";
    case Category::Location: return "Location";
    case Category::TextualContext: return "Textual context and subject specification";
    case Category::NonTextualEvidence: return "Non-textual evidence";
    case Category::DateTime: return "Date and time period";
    case Category::Other: return "Other";
  }
  return "Other";
}

std::optional<Category> try_category_from_letter(char letter) noexcept {
  switch (letter) {
    case 'A': return Category::Speaker;
    case 'B': return Category::Location;
    case 'C': return Category::TextualContext;
    case 'E': return Category::NonTextualEvidence;
    case 'F': return Category::DateTime;
    case 'G': return Category::Other;
    default: return std::nullopt;
  }
}

Category category_from_letter(char letter) {
  if (auto c = try_category_from_letter(letter)) return *c;
  fail(ErrorCode::InvalidCategoryLetter,
       std::string("invalid category letter '") + letter + "'");
}

std::string_view to_string(GroundTruth truth) {
  return truth == GroundTruth::True ? "true" : "false";
}

VerdictMap::VerdictMap(const std::map<std::string, GroundTruth>& entries) {
  for (const auto& [k, v] : entries) set(k, v);
}

VerdictMap VerdictMap::liar_default() {
  VerdictMap m;
  for (auto l : {"pants-fire", "false", "mostly-false"}) m.set(l, GroundTruth::False);
  for (auto l : {"half-true", "mostly-true", "true"}) m.set(l, GroundTruth::True);
  return m;
}

void VerdictMap::set(std::string_view label, GroundTruth value) {
  entries_[to_lower_ascii(trim(label))] = value;
}

Verdict binarize_verdict(std::string_view raw_label, const VerdictMap& mapping) {
  auto key = to_lower_ascii(trim(raw_label));
  auto it = mapping.entries().find(key);
  if (it == mapping.entries().end()) {
    fail(ErrorCode::UnmappedLabel, "verdict label '" + std::string(raw_label) + "' is not mapped");
  }
  return Verdict{it->second, std::string(raw_label)};
}

VeracityScore snap_score(double raw, std::string reply_text) {
  if (!(raw >= 0.0 && raw <= 1.0)) {
    fail(ErrorCode::OutOfRange, "score " + std::to_string(raw) + " outside [0, 1]");
  }
  double snapped = 0.5;
  if (raw < 0.25) snapped = 0.0;
  else if (raw > 0.75) snapped = 1.0;
  return VeracityScore{snapped, raw, std::move(reply_text)};
}

std::string_view to_string(RouteValue v) {
  return v == RouteValue::UserQuery ? "U" : "W";
}

std::string_view to_string(RouteSource s) {
  return s == RouteSource::LlmRouter ? "llm" : "heuristic";
}

RouteValue parse_route_value(std::string_view text) {
  if (text == "U") return RouteValue::UserQuery;
  if (text == "W") return RouteValue::WebRetrieval;
  fail(ErrorCode::InvalidArgument, "unknown route '" + std::string(text) + "'");
}

RouteSource parse_route_source(std::string_view text) {
  if (text == "llm") return RouteSource::LlmRouter;
  if (text == "heuristic") return RouteSource::HeuristicRouter;
  fail(ErrorCode::InvalidArgument, "unknown route source '" + std::string(text) + "'");
}

void validate(const Statement& s) {
  if (trim(s.id).empty()) fail(ErrorCode::InvalidArgument, "statement id is empty");
  if (trim(s.text).empty()) {
    fail(ErrorCode::InvalidArgument, "statement '" + s.id + "' has empty text");
  }
  if (s.annotations.size() > kMaxAnnotations) {
    fail(ErrorCode::InvalidArgument, "statement '" + s.id + "' has more than 3 annotations");
  }
  std::set<std::string> labelers;
  for (const auto& a : s.annotations) {
    if (!labelers.insert(a.labeler).second) {
      fail(ErrorCode::DuplicateLabeler,
           "labeler '" + a.labeler + "' appears twice on statement '" + s.id + "'");
    }
  }
}

}  // namespace clarify
