#pragma once

// Hand-built metric fixtures and an independent confusion-matrix oracle,
// shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "clarify/dataset.hpp"
#include "clarify/metrics.hpp"

namespace clarify::testing {

struct OracleResult {
  double macro_f1 = 0;
  double accuracy = 0;
  bool empty = false;
};

// Direct counting over the instance list, written without the library.
inline OracleResult oracle_metrics(const std::vector<double>& preds, const std::vector<bool>& truths,
                                   bool resolved_only) {
  std::vector<int> p;
  std::vector<int> t;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const bool abstain = preds[i] == 0.5;
    if (abstain && resolved_only) continue;
    p.push_back(abstain ? -1 : static_cast<int>(preds[i]));
    t.push_back(truths[i] ? 1 : 0);
  }
  OracleResult r;
  if (p.empty()) {
    r.empty = true;
    return r;
  }
  double f1_sum = 0;
  for (int cls = 0; cls <= 1; ++cls) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      if (p[i] == cls && t[i] == cls) tp += 1;
      if (p[i] == cls && t[i] != cls) fp += 1;
      if (t[i] == cls && p[i] != cls) fn += 1;
    }
    double precision = tp + fp > 0 ? tp / (tp + fp) : 0;
    double recall = tp + fn > 0 ? tp / (tp + fn) : 0;
    f1_sum += precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0;
  }
  double correct = 0;
  for (std::size_t i = 0; i < p.size(); ++i) correct += p[i] == t[i] ? 1 : 0;
  r.macro_f1 = 100.0 * f1_sum / 2.0;
  r.accuracy = 100.0 * correct / static_cast<double>(p.size());
  return r;
}

struct OracleComparison {
  std::size_t instances = 0;
  std::size_t compared = 0;
  double max_diff = 0;
};

// Random instances with n in [1, 20] under both policies.
inline OracleComparison compare_with_oracle(std::size_t instances, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> len(1, 20);
  std::uniform_real_distribution<double> raw(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  OracleComparison out;
  out.instances = instances;
  for (std::size_t k = 0; k < instances; ++k) {
    const int n = len(rng);
    std::vector<VeracityScore> scores;
    std::vector<GroundTruth> truths;
    std::vector<double> p;
    std::vector<bool> t;
    for (int i = 0; i < n; ++i) {
      scores.push_back(snap_score(raw(rng)));
      p.push_back(scores.back().snapped);
      t.push_back(coin(rng));
      truths.push_back(t.back() ? GroundTruth::True : GroundTruth::False);
    }
    for (auto policy : {AbstainPolicy::AbstainAsError, AbstainPolicy::ResolvedOnly}) {
      auto expected = oracle_metrics(p, t, policy == AbstainPolicy::ResolvedOnly);
      if (expected.empty) continue;
      double f1 = macro_f1(scores, truths, policy);
      double acc = accuracy(scores, truths, policy);
      out.max_diff = std::max({out.max_diff, std::abs(f1 - expected.macro_f1), std::abs(acc - expected.accuracy)});
      ++out.compared;
    }
  }
  return out;
}

// Per-category counts of user-routed over total: A 12/22, B 10/13, C 10/21,
// E 17/18, F 9/22, G 1/3.
inline std::vector<RoutedCategory> routing_fixture() {
  const std::vector<std::tuple<Category, int, int>> counts = {
      {Category::Speaker, 12, 22},        {Category::Location, 10, 13}, {Category::TextualContext, 10, 21},
      {Category::NonTextualEvidence, 17, 18}, {Category::DateTime, 9, 22}, {Category::Other, 1, 3}};
  std::vector<RoutedCategory> items;
  for (const auto& [cat, user, total] : counts) {
    for (int i = 0; i < total; ++i) {
      items.push_back({cat, i < user ? RouteValue::UserQuery : RouteValue::WebRetrieval});
    }
  }
  return items;
}

inline const std::map<char, double>& routing_expected() {
  static const std::map<char, double> m{{'A', 54.55}, {'B', 76.92}, {'C', 47.62},
                                        {'E', 94.44}, {'F', 40.91}, {'*', 59.60}};
  return m;
}

// Twelve annotated statements with one prediction each.
struct AgreementCase {
  std::string labels;  // one letter per labeler
  char prediction;
};

inline const std::vector<AgreementCase>& agreement_cases() {
  static const std::vector<AgreementCase> cases = {
      {"AAA", 'A'}, {"AAB", 'B'}, {"BBB", 'C'}, {"CEF", 'E'}, {"FF", 'F'},  {"E", 'E'},
      {"EEC", 'E'}, {"GAA", 'G'}, {"CCC", 'C'}, {"BF", 'A'},  {"FFF", 'B'}, {"ABC", 'A'},
  };
  return cases;
}

inline Corpus agreement_corpus() {
  std::vector<Statement> statements;
  int n = 0;
  for (const auto& c : agreement_cases()) {
    Statement s;
    s.id = "t" + std::to_string(++n);
    s.text = "Statement " + std::to_string(n);
    int labeler = 0;
    for (char l : c.labels) s.annotations.push_back({"l" + std::to_string(++labeler), category_from_letter(l)});
    statements.push_back(std::move(s));
  }
  return Corpus(std::move(statements));
}

inline std::map<std::string, Category> agreement_predictions() {
  std::map<std::string, Category> preds;
  int n = 0;
  for (const auto& c : agreement_cases()) preds["t" + std::to_string(++n)] = category_from_letter(c.prediction);
  return preds;
}

struct ExpectedTally {
  std::size_t hits, total;
};

// Hand-computed hits/total per filter; key '*' is the overall tally.
inline std::map<char, ExpectedTally> agreement_expected(AgreementFilter f) {
  switch (f) {
    case AgreementFilter::MatchAny:
      return {{'*', {9, 12}}, {'A', {2, 2}}, {'B', {1, 3}}, {'C', {1, 1}},
              {'E', {3, 3}},  {'F', {1, 2}}, {'G', {1, 1}}};
    case AgreementFilter::TwoOfThree:
      return {{'*', {4, 8}}, {'A', {1, 3}}, {'B', {0, 1}}, {'C', {1, 1}}, {'E', {1, 1}}, {'F', {1, 2}}};
    case AgreementFilter::Unanimous:
      return {{'*', {3, 5}}, {'A', {1, 1}}, {'B', {0, 1}}, {'C', {1, 1}}, {'F', {1, 2}}};
  }
  return {};
}

inline bool agreement_matches(const CategoryAccuracy& got, AgreementFilter f) {
  auto want = agreement_expected(f);
  if (got.overall.hits != want['*'].hits || got.overall.total != want['*'].total) return false;
  if (got.per_category.size() + 1 != want.size()) return false;
  for (const auto& [cat, tally] : got.per_category) {
    auto it = want.find(letter_of(cat));
    if (it == want.end() || it->second.hits != tally.hits || it->second.total != tally.total) return false;
  }
  return true;
}

}  // namespace clarify::testing
