#pragma once

// Runs the hand-labelled reply fixtures through the reply parsers.

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clarify/error.hpp"
#include "clarify/prompts.hpp"
#include "support.hpp"

namespace clarify::testing {

struct SuiteResult {
  std::size_t total = 0;
  std::size_t agreed = 0;
  std::vector<std::string> mismatches;

  bool all_agree() const { return total > 0 && agreed == total; }
};

inline ParseMode suite_mode(const nlohmann::json& entry) {
  return entry.value("mode", std::string("lenient")) == "strict" ? ParseMode::Strict : ParseMode::Lenient;
}

// `kind` is "score", "route" or "category"; the fixture file is <kind>_replies.json.
inline SuiteResult run_parser_suite(const std::string& kind) {
  SuiteResult r;
  const auto cases = load_json(fixture_path(kind + "_replies.json"));
  for (const auto& c : cases) {
    ++r.total;
    const auto reply = c.at("reply").get<std::string>();
    const auto mode = suite_mode(c);
    std::string got;
    std::string want;
    try {
      if (kind == "score") {
        got = nlohmann::json(parse_score_reply(reply, mode).snapped).dump();
        if (c.contains("score")) want = nlohmann::json(c["score"].get<double>()).dump();
      } else if (kind == "route") {
        got = std::string(to_string(parse_route_reply(reply, mode).value));
        if (c.contains("route")) want = c["route"].get<std::string>();
      } else {
        auto parsed = parse_category_reply(reply, mode);
        std::string letters;
        for (auto cat : parsed.categories) {
          if (!letters.empty()) letters += '|';
          letters += letter_of(cat);
        }
        got = parsed.question + " => " + letters;
        if (c.contains("categories")) {
          want = c.at("question").get<std::string>() + " => " + c["categories"].get<std::string>();
        }
      }
    } catch (const Error& e) {
      got = "error " + std::string(error_code_name(e.code()));
    }
    if (c.contains("error")) want = "error " + c["error"].get<std::string>();
    if (got == want) {
      ++r.agreed;
    } else {
      r.mismatches.push_back(nlohmann::json(reply).dump() + ": got '" + got + "', want '" + want + "'");
    }
  }
  return r;
}

}  // namespace clarify::testing
