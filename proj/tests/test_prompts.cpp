#include <gtest/gtest.h>

#include "clarify/error.hpp"
#include "clarify/prompts.hpp"
#include "parser_suite.hpp"

using namespace clarify;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::ConfigError;
}

void expect_suite(const std::string& kind) {
  auto r = clarify::testing::run_parser_suite(kind);
  for (const auto& m : r.mismatches) ADD_FAILURE() << kind << " " << m;
  EXPECT_GE(r.total, 30u);
  EXPECT_EQ(r.agreed, r.total);
}

}  // namespace

TEST(Templates, SlotsPerTemplate) {
  using S = std::vector<std::string>;
  EXPECT_EQ(prompt_template(TemplateId::GenericQuestion).slots(), S{"statement"});
  EXPECT_EQ(prompt_template(TemplateId::CategoryQuestion).slots(), S{"statement"});
  EXPECT_EQ(prompt_template(TemplateId::RouteDecision).slots(), (S{"statement", "question"}));
  EXPECT_EQ(prompt_template(TemplateId::VeracityEnabledWithContext).slots(),
            (S{"statement", "question", "context"}));
  EXPECT_EQ(prompt_template(TemplateId::VeracityEnabledWithBlock).slots(), (S{"statement", "context"}));
  EXPECT_EQ(prompt_template(TemplateId::SimulatedUser).slots(), (S{"statement", "question", "article"}));
  EXPECT_EQ(prompt_template(TemplateId::FillBlankExtract).slots(), (S{"statement", "article"}));
}

TEST(Templates, RenderSubstitutesOnce) {
  auto text = render(TemplateId::RouteDecision, {{"statement", "A {question} claim"}, {"question", "Who?"}});
  EXPECT_NE(text.find("Consider the following statement: A {question} claim, and a question regarding that "
                      "statement: Who?."),
            std::string::npos);
  EXPECT_EQ(text.find("{statement}"), std::string::npos);
}

TEST(Templates, VeracityWording) {
  auto plain = render(TemplateId::VeracityEnabled, {{"statement", "The sky is green"}});
  EXPECT_TRUE(plain.starts_with("Rate the truthfulness of the following statement: The sky is green.\n"));
  EXPECT_NE(plain.find("If uncertain or lacking context, use 0.5."), std::string::npos);

  auto disabled = render(TemplateId::VeracityDisabled, {{"statement", "x"}});
  EXPECT_NE(disabled.find("Respond with 0 or 1 to your best ability"), std::string::npos);

  auto ctx = render(TemplateId::VeracityEnabledWithContext,
                    {{"statement", "x"}, {"question", "Who said it?"}, {"context", "The mayor."}});
  EXPECT_NE(ctx.find("Question: Who said it?, Answer: The mayor.."), std::string::npos);
}

TEST(Templates, MissingSlot) {
  EXPECT_EQ(code_of([] { render(TemplateId::RouteDecision, {{"statement", "x"}}); }), ErrorCode::MissingSlot);
  EXPECT_EQ(code_of([] { render(TemplateId::VeracityEnabled, {}); }), ErrorCode::MissingSlot);
}

TEST(Templates, ExtraBindingsIgnored) {
  EXPECT_NO_THROW(render(TemplateId::VeracityEnabled, {{"statement", "x"}, {"article", "unused"}}));
}

TEST(Templates, Catalog) {
  auto cat = template_catalog();
  EXPECT_EQ(cat.size(), std::size(kAllTemplates));
  for (auto id : kAllTemplates) {
    ASSERT_TRUE(cat.contains(std::string(to_string(id))));
    EXPECT_FALSE(cat[std::string(to_string(id))].get<std::string>().empty());
  }
}

TEST(Templates, Reminders) {
  EXPECT_NE(format_reminder(TemplateId::CategoryQuestion).find("vertical bar"), std::string_view::npos);
  EXPECT_NE(format_reminder(TemplateId::RouteDecision).find("'U' or 'W'"), std::string_view::npos);
  EXPECT_NE(format_reminder(TemplateId::VeracityEnabled).find("number"), std::string_view::npos);
}

TEST(CategoryParser, Basic) {
  auto r = parse_category_reply("Which nurse are you referring to? A");
  EXPECT_EQ(r.question, "Which nurse are you referring to?");
  EXPECT_EQ(r.primary(), Category::Speaker);

  auto multi = parse_category_reply("Where and when was this said? B|F");
  EXPECT_EQ(multi.categories, (std::vector<Category>{Category::Location, Category::DateTime}));

  auto dup = parse_category_reply("Where? B|B|F");
  EXPECT_EQ(dup.categories.size(), 2u);
}

TEST(CategoryParser, LenientDecorations) {
  auto r = parse_category_reply("Question: Which law is this?\nCategory: C");
  EXPECT_EQ(r.question, "Which law is this?");
  EXPECT_EQ(r.primary(), Category::TextualContext);
  EXPECT_EQ(parse_category_reply("Which image? (E)").primary(), Category::NonTextualEvidence);
}

TEST(CategoryParser, Errors) {
  EXPECT_EQ(code_of([] { parse_category_reply("Which one? D"); }), ErrorCode::InvalidCategoryLetter);
  EXPECT_EQ(code_of([] { parse_category_reply("Which one?"); }), ErrorCode::NoCategoryFound);
  EXPECT_EQ(code_of([] { parse_category_reply(""); }), ErrorCode::NoCategoryFound);
  EXPECT_EQ(code_of([] { parse_category_reply("A"); }), ErrorCode::NoCategoryFound);
  EXPECT_EQ(code_of([] { parse_category_reply("Question: Who?\nCategory: A", ParseMode::Strict); }),
            ErrorCode::NoCategoryFound);
}

TEST(RouteParser, Basic) {
  EXPECT_EQ(parse_route_reply("U").value, RouteValue::UserQuery);
  EXPECT_EQ(parse_route_reply("W").source, RouteSource::LlmRouter);
  EXPECT_EQ(parse_route_reply("Not U. Final answer: W").value, RouteValue::WebRetrieval);
  EXPECT_EQ(code_of([] { parse_route_reply("The U.S. government"); }), ErrorCode::NoRouteFound);
  EXPECT_EQ(code_of([] { parse_route_reply("U.", ParseMode::Strict); }), ErrorCode::NoRouteFound);
}

TEST(ScoreParser, Basic) {
  EXPECT_EQ(parse_score_reply("0").snapped, 0.0);
  EXPECT_EQ(parse_score_reply("I'd say 0.9").snapped, 1.0);
  EXPECT_EQ(parse_score_reply("In 2021, rating 0.5").snapped, 0.5);
  EXPECT_EQ(parse_score_reply("0.3").reply_text, "0.3");
  EXPECT_EQ(code_of([] { parse_score_reply("unsure"); }), ErrorCode::NoScoreFound);
  EXPECT_EQ(code_of([] { parse_score_reply("7"); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([] { parse_score_reply("Score: 1", ParseMode::Strict); }), ErrorCode::NoScoreFound);
}

TEST(ParserSuites, ScoreFixtures) { expect_suite("score"); }
TEST(ParserSuites, RouteFixtures) { expect_suite("route"); }
TEST(ParserSuites, CategoryFixtures) { expect_suite("category"); }
