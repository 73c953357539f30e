#include "clarify/prompts.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <regex>

#include "clarify/error.hpp"

namespace clarify {

namespace {

constexpr std::string_view kGenericQuestion =
    R"PROMPT(This is a conversation between a user and a question-answering bot.
User: Initial Question: {statement}
Bot: To answer this question, I need to ask the following clarifying question:)PROMPT";

constexpr std::string_view kKeywordPair =
    R"PROMPT(This is a conversation between a user and a question-answering bot. The bot has to limit its response to 2 words, one noun and one adjective to name the necessary detail.
User: Evaluate the truthfulness of this statement: {statement}
Bot: To evaluate the truthfulness, I need the following detail)PROMPT";

constexpr std::string_view kCategoryQuestion =
    R"PROMPT(Classify the missing information in the statement by asking a clarifying question and assigning it to the correct category, where applicable. Use the letter associated with each category:

A: Speaker or person mentioned but not identified
B: Location mentioned but not specified
C: Textual evidence, information, or object mentioned but not specified
E: Visual or audio evidence specifically mentioned in the statement
F: Providing the date for the statement
G: Other (not related to any of the categories above)
Note: Categorize based on the most critical information missing.

Examples for reference:

A: "A nurse claims COVID is a hoax." - Which nurse are you referring to?
B: "Wages have gone up faster than inflation." - Which country are you referring to in regards to this statement?
C: "The vaccine has shown to have negative effects." - Which vaccine are you referring to?
E: "An image shows a map of Iran." - Can you provide the image you're referring to?
F: "New York has the lowest crime rate in the country." - Can you provide the date when this statement was made? (Not related to categories above)
E: "A scientist says the image shows a country's inflation grow over time." - Can you provide the image you're referring to? (In this case, the image will provide the most information.)
Given Statement: {statement}

Task: Formulate the clarifying question and identify the category or categories by their respective letters, separated by a vertical bar. End your response with the category letter or letters.)PROMPT";

constexpr std::string_view kRouteDecision =
    R"PROMPT(Consider the following statement: {statement}, and a question regarding that statement: {question}. Your task is to decide the most suitable approach for answering the question based on two options: querying the user or conducting a web search.

The user possesses the following information related to the statement, only if it is relevant for understanding the statement:

Speaker or person mentioned but not specified (pronouns)
Vague location (state, country, city, school)
Date of the statement (year, time period, day, week)
Extremely vague/unspecified subjects (unspecified type of medicine, law, program)
Any non-textual evidence is not recoverable (image, video, audio)
A web search can provide an answer to the question if it is likely to retrieve context about the statement online.

Example: 'Muslim figure: We must have pork-free menus or we will leave U.S.' - We cannot identify the figure by conducting a web search.
Example 'The US passed a law that cuts taxes for the poor in 2021' - We do not know what the law is, but we are likely to find information via web search.

Task: Determine whether a user query or web search is better suited for answering the question. Respond with a 'U' for user query, and 'W' for web retrieval. Only select 'U' for the user if it's unlikely that the statement can be retrieved from the web.)PROMPT";

constexpr std::string_view kVeracityEnabled =
    R"PROMPT(Rate the truthfulness of the following statement: {statement}.
Please rate the statement's truthfulness on a scale from 0 to 1, where 0 signifies 'False' and 1 signifies 'True'. If uncertain or lacking context, use 0.5. Do not make assumptions or provide explanations; respond with a number.)PROMPT";

constexpr std::string_view kVeracityEnabledWithContext =
    R"PROMPT(Rate the truthfulness of the following statement: {statement}.
The following context from a user may be provided: Question: {question}, Answer: {context}.
Please rate the statement's truthfulness on a scale from 0 to 1, where 0 signifies 'False' and 1 signifies 'True'. If uncertain or lacking context, use 0.5. Do not make assumptions or provide explanations; respond with a number.)PROMPT";

constexpr std::string_view kVeracityEnabledWithBlock =
    R"PROMPT(Rate the truthfulness of the following statement: {statement}.
The following context from a user may be provided: {context}
Please rate the statement's truthfulness on a scale from 0 to 1, where 0 signifies 'False' and 1 signifies 'True'. If uncertain or lacking context, use 0.5. Do not make assumptions or provide explanations; respond with a number.)PROMPT";

constexpr std::string_view kVeracityDisabled =
    R"PROMPT(Rate the truthfulness of the following statement: {statement}.
Please rate the statement's truthfulness on a scale from 0 to 1, where 0 signifies 'False' and 1 signifies 'True'. If uncertain or lacking context, use 0.5. Do not make assumptions or provide explanations; respond with a number.
Respond with 0 or 1 to your best ability; do not provide any other responses. Do not make assumptions or provide explanations; only respond with a number.)PROMPT";

constexpr std::string_view kVeracityDisabledWithContext =
    R"PROMPT(Rate the truthfulness of the following statement: {statement}.
The following context from a user may be provided: Question: {question}, Answer: {context}.
Please rate the statement's truthfulness on a scale from 0 to 1, where 0 signifies 'False' and 1 signifies 'True'. If uncertain or lacking context, use 0.5. Do not make assumptions or provide explanations; respond with a number.
Respond with 0 or 1 to your best ability; do not provide any other responses. Do not make assumptions or provide explanations; only respond with a number.)PROMPT";

constexpr std::string_view kSimulatedUser =
    R"PROMPT(You are the user who shared the statement below, and you know the background described in the context. Answer the question about the statement directly, only providing information in accordance with the following guidelines. You can provide the speaker or person referred to, the location, the date or time period, the specific subject, and a description of any non-textual evidence (image, video, audio) the statement refers to. Do not say whether the statement is true or false and do not add information the question does not ask for. If the context does not contain the requested information, respond with "I cannot provide this information."

Statement: {statement}
Question: {question}
Context: {article}
Answer:)PROMPT";

constexpr std::string_view kFillBlankExtract =
    R"PROMPT(Using only the article below, fill in the missing information for the statement. Respond with exactly the following four lines, completing each one. If the article does not provide the information for a line, complete it with "I cannot provide this information."

Name of speaker or person referred to in the statement (if relevant):
Location referred to in the statement (if relevant):
Date including year or time period referred to in the statement (if relevant):
Vague or unspecified subject referred to in the statement (if relevant):

Statement: {statement}
Article: {article})PROMPT";

const PromptTemplate kTemplates[] = {
    {TemplateId::GenericQuestion, kGenericQuestion},
    {TemplateId::KeywordPair, kKeywordPair},
    {TemplateId::CategoryQuestion, kCategoryQuestion},
    {TemplateId::RouteDecision, kRouteDecision},
    {TemplateId::VeracityEnabled, kVeracityEnabled},
    {TemplateId::VeracityEnabledWithContext, kVeracityEnabledWithContext},
    {TemplateId::VeracityEnabledWithBlock, kVeracityEnabledWithBlock},
    {TemplateId::VeracityDisabled, kVeracityDisabled},
    {TemplateId::VeracityDisabledWithContext, kVeracityDisabledWithContext},
    {TemplateId::SimulatedUser, kSimulatedUser},
    {TemplateId::FillBlankExtract, kFillBlankExtract},
};

constexpr std::string_view kSlotNames[] = {"statement", "question", "context", "article"};

// Finds the next "{slot}" marker at or after `from`; returns npos if none.
std::size_t next_slot(std::string_view body, std::size_t from, std::string_view& name) {
  for (auto pos = body.find('{', from); pos != std::string_view::npos; pos = body.find('{', pos + 1)) {
    for (auto slot : kSlotNames) {
      if (body.substr(pos + 1, slot.size()) == slot && pos + 1 + slot.size() < body.size() &&
          body[pos + 1 + slot.size()] == '}') {
        name = slot;
        return pos;
      }
    }
  }
  return std::string_view::npos;
}

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    lines.emplace_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

}  // namespace

std::string_view to_string(TemplateId id) {
  switch (id) {
    case TemplateId::GenericQuestion: return "GenericQuestion";
    case TemplateId::KeywordPair: return "KeywordPair";
    case TemplateId::CategoryQuestion: return "CategoryQuestion";
    case TemplateId::RouteDecision: return "RouteDecision";
    case TemplateId::VeracityEnabled: return "VeracityEnabled";
    case TemplateId::VeracityEnabledWithContext: return "VeracityEnabledWithContext";
    case TemplateId::VeracityEnabledWithBlock: return "VeracityEnabledWithBlock";
    case TemplateId::VeracityDisabled: return "VeracityDisabled";
    case TemplateId::VeracityDisabledWithContext: return "VeracityDisabledWithContext";
    case TemplateId::SimulatedUser: return "SimulatedUser";
    case TemplateId::FillBlankExtract: return "FillBlankExtract";
  }
  return "Unknown";
}

std::vector<std::string> PromptTemplate::slots() const {
  std::vector<std::string> out;
  std::string_view name;
  for (auto pos = next_slot(body, 0, name); pos != std::string_view::npos;
       pos = next_slot(body, pos + name.size() + 2, name)) {
    if (std::find(out.begin(), out.end(), name) == out.end()) out.emplace_back(name);
  }
  return out;
}

const PromptTemplate& prompt_template(TemplateId id) {
  for (const auto& t : kTemplates) {
    if (t.id == id) return t;
  }
  fail(ErrorCode::InvalidArgument, "unknown template id");
}

std::string render(TemplateId id, const Bindings& bindings) {
  const auto body = prompt_template(id).body;
  std::string out;
  out.reserve(body.size() + 256);
  std::size_t cursor = 0;
  std::string_view name;
  for (auto pos = next_slot(body, 0, name); pos != std::string_view::npos;
       pos = next_slot(body, cursor, name)) {
    auto it = bindings.find(std::string(name));
    if (it == bindings.end()) {
      fail(ErrorCode::MissingSlot, "template " + std::string(to_string(id)) +
                                       " needs slot '" + std::string(name) + "'");
    }
    out.append(body.substr(cursor, pos - cursor));
    out.append(it->second);
    cursor = pos + name.size() + 2;
  }
  out.append(body.substr(cursor));
  return out;
}

nlohmann::json template_catalog() {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& t : kTemplates) j[std::string(to_string(t.id))] = std::string(t.body);
  return j;
}

std::string_view format_reminder(TemplateId id) {
  switch (id) {
    case TemplateId::CategoryQuestion:
      return "Reminder: end your response with the category letter or letters (A, B, C, E, F or G), "
             "separated by a vertical bar.";
    case TemplateId::RouteDecision:
      return "Reminder: respond with only 'U' or 'W'.";
    default:
      return "Reminder: respond with only a number: 0, 0.5 or 1.";
  }
}

// ---------------------------------------------------------------------------
// Category replies

CategoryReply parse_category_reply(std::string_view text, ParseMode mode) {
  auto lines = split_lines(text);
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) fail(ErrorCode::NoCategoryFound, "empty reply");

  const std::string last = trim(lines.back());
  lines.pop_back();

  static const std::regex strict_re(R"(^(.*\S)\s+([A-Z](?:\|[A-Z])*)$)");
  static const std::regex lenient_re(
      R"(^(.*?)(?:^|[\s:(\[\-])\(?\[?([A-Z](?:\s*[|,/]\s*[A-Z])*)\]?\)?\s*[.)]?$)");
  std::smatch m;
  std::string head;
  std::string block;
  if (mode == ParseMode::Strict) {
    // A head ending in a list separator means the letters were not '|'-joined.
    if (!lines.empty() || !std::regex_match(last, m, strict_re) ||
        std::string_view(",/|").find(m[1].str().back()) != std::string_view::npos) {
      fail(ErrorCode::NoCategoryFound, "reply is not '<question> <letters>'");
    }
    head = m[1].str();
    block = m[2].str();
  } else {
    if (!std::regex_match(last, m, lenient_re)) {
      fail(ErrorCode::NoCategoryFound, "no trailing category letters in reply");
    }
    head = m[1].str();
    block = m[2].str();
  }

  CategoryReply reply;
  for (char c : block) {
    if (c < 'A' || c > 'Z') continue;
    auto cat = category_from_letter(c);
    if (std::find(reply.categories.begin(), reply.categories.end(), cat) == reply.categories.end()) {
      reply.categories.push_back(cat);
    }
  }

  std::string question;
  for (const auto& l : lines) {
    question += l;
    question += '\n';
  }
  question += head;
  question = trim(question);
  if (mode == ParseMode::Lenient) {
    // "Category:" anywhere at the end, or a bare "Category" after sentence punctuation.
    static const std::regex label_re(
        R"(\s*(?:[-(\[]\s*)?(?:[Cc]ategor(?:y|ies)|[Ll]etters?)\s*:\s*$)");
    static const std::regex bare_label_re(R"(([?.!])\s*(?:[-(\[]\s*)?[Cc]ategor(?:y|ies)\s*$)");
    static const std::regex lead_re(R"(^(?:[Cc]larifying\s+)?[Qq]uestion\s*:\s*)");
    question = std::regex_replace(question, label_re, "");
    question = std::regex_replace(question, bare_label_re, "$1");
    question = std::regex_replace(question, lead_re, "");
    question = trim(question);
    while (!question.empty() && (question.back() == '-' || question.back() == ':')) {
      question.pop_back();
      question = trim(question);
    }
  }
  if (question.empty()) fail(ErrorCode::NoCategoryFound, "reply carries letters but no question");
  reply.question = std::move(question);
  return reply;
}

// ---------------------------------------------------------------------------
// Route replies

Route parse_route_reply(std::string_view text, ParseMode mode) {
  const auto t = trim(text);
  if (mode == ParseMode::Strict) {
    if (t == "U") return Route{RouteValue::UserQuery, RouteSource::LlmRouter};
    if (t == "W") return Route{RouteValue::WebRetrieval, RouteSource::LlmRouter};
    fail(ErrorCode::NoRouteFound, "reply is not exactly 'U' or 'W'");
  }
  std::optional<RouteValue> last;
  for (std::size_t i = 0; i < t.size(); ++i) {
    char c = t[i];
    if (c != 'U' && c != 'W') continue;
    if (i > 0 && is_alnum(t[i - 1])) continue;
    if (i + 1 < t.size() && is_alnum(t[i + 1])) continue;
    // "U.S." and similar abbreviations.
    if (i + 2 < t.size() && t[i + 1] == '.' && is_alnum(t[i + 2])) continue;
    if (i > 1 && t[i - 1] == '.' && is_alnum(t[i - 2])) continue;
    last = c == 'U' ? RouteValue::UserQuery : RouteValue::WebRetrieval;
  }
  if (!last) fail(ErrorCode::NoRouteFound, "reply names neither U nor W");
  return Route{*last, RouteSource::LlmRouter};
}

// ---------------------------------------------------------------------------
// Score replies

VeracityScore parse_score_reply(std::string_view text, ParseMode mode) {
  const std::string reply(text);
  if (mode == ParseMode::Strict) {
    static const std::regex strict_re(R"(^\s*(\d+(?:\.\d+)?|\.\d+)\s*$)");
    std::smatch m;
    if (!std::regex_match(reply, m, strict_re)) fail(ErrorCode::NoScoreFound, "reply is not a bare number");
    return snap_score(std::strtod(m[1].str().c_str(), nullptr), reply);
  }
  static const std::regex numeral_re(R"((\d+(?:\.\d+)?|\.\d+))");
  bool any = false;
  std::string first_bad;
  for (auto it = std::sregex_iterator(reply.begin(), reply.end(), numeral_re);
       it != std::sregex_iterator(); ++it) {
    auto pos = static_cast<std::size_t>(it->position(1));
    auto token = (*it)[1].str();
    // Digits glued to a preceding letter or digit belong to a word ("COVID19").
    if (pos > 0 && (is_alnum(reply[pos - 1]))) continue;
    bool negative = pos > 0 && reply[pos - 1] == '-' && (pos < 2 || !is_alnum(reply[pos - 2]));
    auto end = pos + token.size();
    // Skip the integer part of a dotted sequence like "1.2.3" or a version tag.
    if (end < reply.size() && reply[end] == '.' && end + 1 < reply.size() &&
        std::isdigit(static_cast<unsigned char>(reply[end + 1]))) {
      continue;
    }
    any = true;
    double value = std::strtod(token.c_str(), nullptr);
    if (negative) value = -value;
    if (value >= 0.0 && value <= 1.0) return snap_score(value, reply);
    if (first_bad.empty()) first_bad = (negative ? "-" : "") + token;
  }
  if (any) fail(ErrorCode::OutOfRange, "numeral " + first_bad + " outside [0, 1]");
  fail(ErrorCode::NoScoreFound, "no numeral in reply");
}

}  // namespace clarify
