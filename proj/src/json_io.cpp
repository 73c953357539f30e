#include "clarify/json_io.hpp"

#include "clarify/error.hpp"

namespace clarify {

namespace {

char single_letter(const std::string& s) {
  if (s.size() != 1) fail(ErrorCode::InvalidCategoryLetter, "invalid category letter '" + s + "'");
  return s[0];
}

}  // namespace

void to_json(json& j, const Verdict& v) {
  j = json{{"value", std::string(to_string(v.value))}, {"raw_label", v.raw_label}};
}

void from_json(const json& j, Verdict& v) {
  v.value = j.at("value").get<std::string>() == "true" ? GroundTruth::True : GroundTruth::False;
  v.raw_label = j.value("raw_label", std::string());
}

void to_json(json& j, const VeracityScore& s) {
  j = json{{"snapped", s.snapped}, {"raw", nullptr}, {"reply_text", s.reply_text}};
  if (s.raw) j["raw"] = *s.raw;
}

void from_json(const json& j, VeracityScore& s) {
  s.snapped = j.at("snapped").get<double>();
  s.raw = j.contains("raw") && !j["raw"].is_null() ? std::optional<double>(j["raw"].get<double>())
                                                   : std::nullopt;
  s.reply_text = j.value("reply_text", std::string());
}

void to_json(json& j, const Route& r) {
  j = json{{"value", std::string(to_string(r.value))}, {"source", std::string(to_string(r.source))}};
}

void from_json(const json& j, Route& r) {
  r.value = parse_route_value(j.at("value").get<std::string>());
  r.source = parse_route_source(j.at("source").get<std::string>());
}

void to_json(json& j, const CategoryAnnotation& a) {
  j = json{{"labeler", a.labeler}, {"category", std::string(1, letter_of(a.category))}};
}

void from_json(const json& j, CategoryAnnotation& a) {
  a.labeler = j.at("labeler").get<std::string>();
  a.category = category_from_letter(single_letter(j.at("category").get<std::string>()));
}

void to_json(json& j, const Statement& s) {
  j = json{{"id", s.id},
           {"text", s.text},
           {"possibility", std::string(to_string(s.possibility))},
           {"verdict", nullptr},
           {"article", nullptr},
           {"annotations", s.annotations}};
  if (s.verdict) j["verdict"] = *s.verdict;
  if (s.article) j["article"] = *s.article;
}

void from_json(const json& j, Statement& s) {
  s.id = j.at("id").get<std::string>();
  s.text = j.at("text").get<std::string>();
  s.possibility = parse_possibility(j.value("possibility", std::string("possible")));
  s.verdict.reset();
  if (j.contains("verdict") && !j["verdict"].is_null()) s.verdict = j["verdict"].get<Verdict>();
  s.article.reset();
  if (j.contains("article") && !j["article"].is_null()) s.article = j["article"].get<std::string>();
  s.annotations = j.value("annotations", std::vector<CategoryAnnotation>{});
}

json category_json(Category c) {
  return json{{"letter", std::string(1, letter_of(c))}, {"name", std::string(category_name(c))}};
}

std::vector<std::string> category_letters(const std::vector<Category>& cats) {
  std::vector<std::string> out;
  out.reserve(cats.size());
  for (auto c : cats) out.emplace_back(1, letter_of(c));
  return out;
}

std::vector<Category> categories_from_letters(const std::vector<std::string>& letters) {
  std::vector<Category> out;
  out.reserve(letters.size());
  for (const auto& l : letters) out.push_back(category_from_letter(single_letter(l)));
  return out;
}

}  // namespace clarify
