#pragma once

// Prompt catalog and the parsers that turn free-text replies into typed
// values.
//
// Parsers run in one of two modes. Lenient (the default) tolerates the
// decoration models add around an answer; strict accepts only the bare form
// the prompt asks for:
//
//   category  lenient: last non-empty line ends in letters joined by '|'
//                      (',' and '/' also accepted, surrounding spaces and a
//                      trailing '.' or ')' ignored); "Category:" labels and a
//                      leading "Question:" are stripped from the question.
//             strict:  "<question> <L>[|<L>...]" and nothing else.
//   route     lenient: the last standalone U or W token decides (a letter
//                      touching another letter or digit, or followed by
//                      ".<letter>" as in "U.S.", is not standalone).
//             strict:  the reply is exactly "U" or "W".
//   score     lenient: the first numeral whose value lies in [0, 1]; numerals
//                      outside the range are skipped, and OutOfRange is raised
//                      only if no numeral is in range.
//             strict:  the reply is exactly one numeral in [0, 1].

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "clarify/domain.hpp"

namespace clarify {

enum class TemplateId {
  GenericQuestion,
  KeywordPair,
  CategoryQuestion,
  RouteDecision,
  VeracityEnabled,
  VeracityEnabledWithContext,
  VeracityEnabledWithBlock,
  VeracityDisabled,
  VeracityDisabledWithContext,
  SimulatedUser,
  FillBlankExtract,
};

inline constexpr TemplateId kAllTemplates[] = {
    TemplateId::GenericQuestion,           TemplateId::KeywordPair,
    TemplateId::CategoryQuestion,          TemplateId::RouteDecision,
    TemplateId::VeracityEnabled,           TemplateId::VeracityEnabledWithContext,
    TemplateId::VeracityEnabledWithBlock,  TemplateId::VeracityDisabled,
    TemplateId::VeracityDisabledWithContext, TemplateId::SimulatedUser,
    TemplateId::FillBlankExtract,
};

std::string_view to_string(TemplateId id);

struct PromptTemplate {
  TemplateId id;
  std::string_view body;  // slots written as {statement}, {question}, {context}, {article}

  std::vector<std::string> slots() const;
};

const PromptTemplate& prompt_template(TemplateId id);

using Bindings = std::map<std::string, std::string>;

// Substitutes every slot in one pass; bound text is never rescanned. Throws
// MissingSlot naming the first unbound slot.
std::string render(TemplateId id, const Bindings& bindings);

// {"CategoryQuestion": "<body>", ...}
nlohmann::json template_catalog();

// Reply line the fill-in-the-blank extraction uses for unsupported fields.
inline constexpr std::string_view kCannotProvide = "I cannot provide this information.";

// Appended to a prompt when the first reply could not be parsed.
std::string_view format_reminder(TemplateId id);

enum class ParseMode { Lenient, Strict };

struct CategoryReply {
  std::string question;
  std::vector<Category> categories;  // non-empty, no duplicates

  Category primary() const { return categories.front(); }
  friend bool operator==(const CategoryReply&, const CategoryReply&) = default;
};

// Throws NoCategoryFound or InvalidCategoryLetter.
CategoryReply parse_category_reply(std::string_view text, ParseMode mode = ParseMode::Lenient);

// Throws NoRouteFound. The returned route's source is LlmRouter.
Route parse_route_reply(std::string_view text, ParseMode mode = ParseMode::Lenient);

// Throws NoScoreFound or OutOfRange.
VeracityScore parse_score_reply(std::string_view text, ParseMode mode = ParseMode::Lenient);

}  // namespace clarify
