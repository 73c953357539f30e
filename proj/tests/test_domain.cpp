#include <gtest/gtest.h>

#include "clarify/domain.hpp"
#include "clarify/error.hpp"
#include "clarify/json_io.hpp"

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

}  // namespace

TEST(Category, LettersRoundTrip) {
  for (auto c : kAllCategories) {
    EXPECT_EQ(category_from_letter(letter_of(c)), c);
  }
  EXPECT_EQ(letter_of(Category::Speaker), 'A');
  EXPECT_EQ(letter_of(Category::Other), 'G');
}

TEST(Category, DIsNotACategory) {
  EXPECT_EQ(code_of([] { category_from_letter('D'); }), ErrorCode::InvalidCategoryLetter);
  EXPECT_FALSE(try_category_from_letter('D'));
  EXPECT_FALSE(try_category_from_letter('a'));
  EXPECT_FALSE(try_category_from_letter('H'));
}

TEST(Category, Names) {
  EXPECT_EQ(category_name(Category::Speaker), "Speaker or person");
  EXPECT_EQ(category_name(Category::NonTextualEvidence), "Non-textual evidence");
  EXPECT_EQ(category_name(Category::DateTime), "Date and time period");
}

TEST(Verdict, LiarDefaultMapping) {
  auto m = VerdictMap::liar_default();
  EXPECT_EQ(binarize_verdict("pants-fire", m).value, GroundTruth::False);
  EXPECT_EQ(binarize_verdict("mostly-false", m).value, GroundTruth::False);
  EXPECT_EQ(binarize_verdict("FALSE", m).value, GroundTruth::False);
  EXPECT_EQ(binarize_verdict("half-true", m).value, GroundTruth::True);
  EXPECT_EQ(binarize_verdict(" Mostly-True ", m).value, GroundTruth::True);
  EXPECT_EQ(binarize_verdict("true", m).raw_label, "true");
}

TEST(Verdict, UnmappedLabel) {
  auto m = VerdictMap::liar_default();
  EXPECT_EQ(code_of([&] { binarize_verdict("full-flop", m); }), ErrorCode::UnmappedLabel);
  EXPECT_EQ(code_of([] { binarize_verdict("true", VerdictMap{}); }), ErrorCode::UnmappedLabel);
}

TEST(Verdict, CustomMap) {
  VerdictMap m({{"Yes", GroundTruth::True}, {"No", GroundTruth::False}});
  EXPECT_EQ(binarize_verdict("yes", m).value, GroundTruth::True);
  EXPECT_EQ(binarize_verdict("NO", m).value, GroundTruth::False);
}

TEST(Score, SnapsToNearestValue) {
  EXPECT_EQ(snap_score(0.0).snapped, 0.0);
  EXPECT_EQ(snap_score(0.24).snapped, 0.0);
  EXPECT_EQ(snap_score(0.25).snapped, 0.5);
  EXPECT_EQ(snap_score(0.5).snapped, 0.5);
  EXPECT_EQ(snap_score(0.75).snapped, 0.5);
  EXPECT_EQ(snap_score(0.76).snapped, 1.0);
  EXPECT_EQ(snap_score(1.0).snapped, 1.0);
  auto s = snap_score(0.3, "0.3");
  EXPECT_DOUBLE_EQ(*s.raw, 0.3);
  EXPECT_EQ(s.reply_text, "0.3");
  EXPECT_TRUE(s.abstained());
  EXPECT_FALSE(snap_score(1.0).abstained());
}

TEST(Score, OutOfRange) {
  EXPECT_EQ(code_of([] { snap_score(-0.01); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([] { snap_score(1.01); }), ErrorCode::OutOfRange);
  EXPECT_EQ(code_of([] { snap_score(std::nan("")); }), ErrorCode::OutOfRange);
}

TEST(Route, Strings) {
  EXPECT_EQ(to_string(RouteValue::UserQuery), "U");
  EXPECT_EQ(to_string(RouteValue::WebRetrieval), "W");
  EXPECT_EQ(parse_route_value("U"), RouteValue::UserQuery);
  EXPECT_EQ(parse_route_source("heuristic"), RouteSource::HeuristicRouter);
  EXPECT_EQ(code_of([] { parse_route_value("X"); }), ErrorCode::InvalidArgument);
}

TEST(Possibility, Parse) {
  EXPECT_EQ(parse_possibility("Hard"), PossibilityLabel::Hard);
  EXPECT_EQ(parse_possibility(" impossible "), PossibilityLabel::Impossible);
  EXPECT_EQ(parse_possibility("possible"), PossibilityLabel::Possible);
  EXPECT_EQ(code_of([] { parse_possibility("maybe"); }), ErrorCode::InvalidArgument);
}

TEST(Statement, Validation) {
  Statement s{"s1", "Some claim.", PossibilityLabel::Hard, std::nullopt, std::nullopt, {}};
  EXPECT_NO_THROW(validate(s));

  auto blank = s;
  blank.text = "  \n";
  EXPECT_EQ(code_of([&] { validate(blank); }), ErrorCode::InvalidArgument);

  auto many = s;
  many.annotations = {{"l1", Category::Speaker}, {"l2", Category::Speaker}, {"l3", Category::Location},
                      {"l4", Category::Other}};
  EXPECT_EQ(code_of([&] { validate(many); }), ErrorCode::InvalidArgument);

  auto dup = s;
  dup.annotations = {{"l1", Category::Speaker}, {"l1", Category::Location}};
  EXPECT_EQ(code_of([&] { validate(dup); }), ErrorCode::DuplicateLabeler);
}

TEST(Text, Helpers) {
  EXPECT_EQ(trim("  a b \t\n"), "a b");
  EXPECT_EQ(trim(""), "");
  EXPECT_EQ(to_lower_ascii("AbC-É"), "abc-É");
  EXPECT_EQ(count_words("  one two\tthree\nfour "), 4u);
  EXPECT_EQ(count_words(""), 0u);
}

TEST(Text, ReferenceTokenCounts) {
  // Simulated-user answers with their reported whitespace token counts.
  const std::string marijuana =
      "The arrests for possession of marijuana occurring every 37 seconds are taking place in the United "
      "States. This statistic is commonly cited to highlight the frequency of marijuana-related arrests in "
      "the country.";
  EXPECT_EQ(count_words(marijuana), 32u);
}

TEST(JsonIo, StatementRoundTrip) {
  Statement s{"s1", "Claim", PossibilityLabel::Impossible, Verdict{GroundTruth::True, "half-true"},
              std::string("article"), {{"l1", Category::DateTime}, {"l2", Category::Speaker}}};
  nlohmann::json j = s;
  EXPECT_EQ(j.get<Statement>(), s);

  Statement bare{"s2", "Other", PossibilityLabel::Possible, std::nullopt, std::nullopt, {}};
  nlohmann::json jb = bare;
  EXPECT_EQ(jb.get<Statement>(), bare);
}

TEST(JsonIo, ScoreAndRouteRoundTrip) {
  auto s = snap_score(0.9, "0.9");
  nlohmann::json js = s;
  EXPECT_EQ(js.get<VeracityScore>(), s);
  Route r{RouteValue::WebRetrieval, RouteSource::LlmRouter};
  nlohmann::json jr = r;
  EXPECT_EQ(jr["value"], "W");
  EXPECT_EQ(jr.get<Route>(), r);
}

TEST(JsonIo, CategoryLetters) {
  std::vector<Category> cats{Category::NonTextualEvidence, Category::DateTime};
  auto letters = category_letters(cats);
  EXPECT_EQ(letters, (std::vector<std::string>{"E", "F"}));
  EXPECT_EQ(categories_from_letters(letters), cats);
  EXPECT_EQ(category_json(Category::Speaker)["name"], "Speaker or person");
}
