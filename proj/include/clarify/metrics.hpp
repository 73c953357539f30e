#pragma once

// Abstention-aware veracity metrics, category-classification accuracy under
// annotator agreement filters, routing shares and pairwise agreement.
// All percentages are on a 0-100 scale and returned unrounded.

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clarify/dataset.hpp"
#include "clarify/domain.hpp"

namespace clarify {

enum class AbstainPolicy {
  // A 0.5 prediction is a false negative for the gold class and a false
  // positive for no class; it counts as incorrect for accuracy.
  AbstainAsError,
  // Abstentions are dropped before scoring.
  ResolvedOnly,
};

std::string_view to_string(AbstainPolicy p);
AbstainPolicy parse_abstain_policy(std::string_view text);

struct ClassScores {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  std::size_t support = 0;
};

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0;
};

// Per-class counts under `policy`; index 0 is False, 1 is True.
std::array<ConfusionCounts, 2> confusion(std::span<const VeracityScore> preds,
                                         std::span<const GroundTruth> truths, AbstainPolicy policy);

// Throws LengthMismatch or EmptyAfterFilter.
double macro_f1(std::span<const VeracityScore> preds, std::span<const GroundTruth> truths,
                AbstainPolicy policy);
double accuracy(std::span<const VeracityScore> preds, std::span<const GroundTruth> truths,
                AbstainPolicy policy);
// Throws EmptyInput.
double resolution_rate(std::span<const VeracityScore> preds);

struct MetricsReport {
  double macro_f1 = 0;
  double accuracy = 0;
  double resolution = 0;
  std::size_t n_total = 0;
  std::size_t n_resolved = 0;
  std::size_t n_skipped = 0;
  ClassScores false_class;
  ClassScores true_class;
  AbstainPolicy policy = AbstainPolicy::AbstainAsError;
};

MetricsReport evaluate(std::span<const VeracityScore> preds, std::span<const GroundTruth> truths,
                       AbstainPolicy policy, std::size_t n_skipped = 0);

// Percentages rounded to two decimals.
nlohmann::json to_json(const MetricsReport& r);
// Unrounded form for storage; metrics_from_exact_json reads it back.
nlohmann::json to_exact_json(const MetricsReport& r);
MetricsReport metrics_from_exact_json(const nlohmann::json& j);

struct ReportRow {
  std::string experiment;
  MetricsReport metrics;
};

// Aligned text table with the columns Experiment, Macro F1 (%), Accuracy (%),
// Percent Resolution (%), followed by the abstain policy.
std::string render_metrics_table(std::span<const ReportRow> rows);

enum class AgreementFilter { MatchAny, TwoOfThree, Unanimous };

std::string_view to_string(AgreementFilter f);
AgreementFilter parse_agreement_filter(std::string_view text);

// Letter held by at least two labelers, if any.
std::optional<Category> majority_label(const std::vector<CategoryAnnotation>& labels);

struct CategoryTally {
  std::size_t hits = 0;
  std::size_t total = 0;
  double percent() const { return total ? 100.0 * static_cast<double>(hits) / static_cast<double>(total) : 0.0; }
};

struct CategoryAccuracy {
  AgreementFilter filter = AgreementFilter::MatchAny;
  CategoryTally overall;
  std::map<Category, CategoryTally> per_category;
};

// Eligibility and scoring per filter:
//   MatchAny    statements with >= 1 label; a hit if the prediction equals any
//               label. Hits are tallied under the predicted letter, misses
//               under the most frequent label (earliest labeler on ties).
//   TwoOfThree  statements where >= 2 labelers share a letter; a hit if the
//               prediction equals that majority letter.
//   Unanimous   statements with >= 2 labels, all identical.
// Predictions for ineligible statements are ignored. Throws
// UnknownStatementId or NoEligibleStatements.
CategoryAccuracy category_accuracy(const std::map<std::string, Category>& preds,
                                   const Corpus& corpus, AgreementFilter filter);

nlohmann::json to_json(const CategoryAccuracy& acc);

struct RoutedCategory {
  Category primary;
  RouteValue route;
};

struct RoutingShare {
  std::map<Category, CategoryTally> per_category;  // hits = user-routed
  CategoryTally overall;
};

RoutingShare routing_share(std::span<const RoutedCategory> items);

nlohmann::json to_json(const RoutingShare& share);

// Throws NoOverlap.
double pairwise_agreement(const std::map<std::string, std::string>& a,
                          const std::map<std::string, std::string>& b);

double round2(double percent);

}  // namespace clarify
