#include "clarify/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "clarify/error.hpp"

namespace clarify {

using nlohmann::json;

namespace {

void check_lengths(std::span<const VeracityScore> preds, std::span<const GroundTruth> truths) {
  if (preds.size() != truths.size()) {
    fail(ErrorCode::LengthMismatch, fmt::format("{} predictions but {} truths", preds.size(), truths.size()));
  }
}

std::size_t kept_count(std::span<const VeracityScore> preds, AbstainPolicy policy) {
  if (policy == AbstainPolicy::AbstainAsError) return preds.size();
  return static_cast<std::size_t>(
      std::count_if(preds.begin(), preds.end(), [](const auto& p) { return !p.abstained(); }));
}

ClassScores scores_from(const ConfusionCounts& c) {
  ClassScores s;
  auto ratio = [](std::size_t a, std::size_t b) {
    return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0;
  };
  s.precision = ratio(c.tp, c.tp + c.fp);
  s.recall = ratio(c.tp, c.tp + c.fn);
  s.f1 = (s.precision + s.recall) > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  s.support = c.tp + c.fn;
  return s;
}

json class_json(const ClassScores& s) {
  return json{{"precision", round2(100 * s.precision)},
              {"recall", round2(100 * s.recall)},
              {"f1", round2(100 * s.f1)},
              {"support", s.support}};
}

json tally_json(const CategoryTally& t) {
  return json{{"hits", t.hits}, {"total", t.total}, {"percent", round2(t.percent())}};
}

}  // namespace

double round2(double percent) { return std::round(percent * 100.0) / 100.0; }

std::string_view to_string(AbstainPolicy p) {
  return p == AbstainPolicy::AbstainAsError ? "abstain-as-error" : "resolved-only";
}

AbstainPolicy parse_abstain_policy(std::string_view text) {
  if (text == "abstain-as-error" || text == "AbstainAsError") return AbstainPolicy::AbstainAsError;
  if (text == "resolved-only" || text == "ResolvedOnly") return AbstainPolicy::ResolvedOnly;
  fail(ErrorCode::ConfigError, "unknown abstain policy '" + std::string(text) + "'");
}

std::array<ConfusionCounts, 2> confusion(std::span<const VeracityScore> preds,
                                         std::span<const GroundTruth> truths, AbstainPolicy policy) {
  check_lengths(preds, truths);
  std::array<ConfusionCounts, 2> counts{};
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto gold = truths[i] == GroundTruth::True ? 1 : 0;
    if (preds[i].abstained()) {
      if (policy == AbstainPolicy::AbstainAsError) ++counts[gold].fn;
      continue;
    }
    const auto predicted = preds[i].snapped == 1.0 ? 1 : 0;
    if (predicted == gold) {
      ++counts[gold].tp;
    } else {
      ++counts[predicted].fp;
      ++counts[gold].fn;
    }
  }
  return counts;
}

double macro_f1(std::span<const VeracityScore> preds, std::span<const GroundTruth> truths,
                AbstainPolicy policy) {
  check_lengths(preds, truths);
  if (kept_count(preds, policy) == 0) fail(ErrorCode::EmptyAfterFilter, "no predictions left to score");
  auto c = confusion(preds, truths, policy);
  return 100.0 * (scores_from(c[0]).f1 + scores_from(c[1]).f1) / 2.0;
}

double accuracy(std::span<const VeracityScore> preds, std::span<const GroundTruth> truths,
                AbstainPolicy policy) {
  check_lengths(preds, truths);
  const auto kept = kept_count(preds, policy);
  if (kept == 0) fail(ErrorCode::EmptyAfterFilter, "no predictions left to score");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].abstained()) continue;
    if ((preds[i].snapped == 1.0) == (truths[i] == GroundTruth::True)) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(kept);
}

double resolution_rate(std::span<const VeracityScore> preds) {
  if (preds.empty()) fail(ErrorCode::EmptyInput, "no predictions");
  auto resolved = std::count_if(preds.begin(), preds.end(), [](const auto& p) { return !p.abstained(); });
  return 100.0 * static_cast<double>(resolved) / static_cast<double>(preds.size());
}

MetricsReport evaluate(std::span<const VeracityScore> preds, std::span<const GroundTruth> truths,
                       AbstainPolicy policy, std::size_t n_skipped) {
  MetricsReport r;
  r.policy = policy;
  r.n_skipped = n_skipped;
  r.n_total = preds.size();
  r.resolution = resolution_rate(preds);
  r.n_resolved = kept_count(preds, AbstainPolicy::ResolvedOnly);
  if (kept_count(preds, policy) > 0) {
    r.macro_f1 = macro_f1(preds, truths, policy);
    r.accuracy = accuracy(preds, truths, policy);
  }
  auto c = confusion(preds, truths, policy);
  r.false_class = scores_from(c[0]);
  r.true_class = scores_from(c[1]);
  return r;
}

json to_json(const MetricsReport& r) {
  return json{{"macro_f1", round2(r.macro_f1)},
              {"accuracy", round2(r.accuracy)},
              {"resolution", round2(r.resolution)},
              {"n_total", r.n_total},
              {"n_resolved", r.n_resolved},
              {"n_skipped", r.n_skipped},
              {"per_class", {{"false", class_json(r.false_class)}, {"true", class_json(r.true_class)}}},
              {"policy", std::string(to_string(r.policy))}};
}

json to_exact_json(const MetricsReport& r) {
  auto cls = [](const ClassScores& c) {
    return json{{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}};
  };
  return json{{"macro_f1", r.macro_f1},     {"accuracy", r.accuracy},
              {"resolution", r.resolution}, {"n_total", r.n_total},
              {"n_resolved", r.n_resolved}, {"n_skipped", r.n_skipped},
              {"false", cls(r.false_class)}, {"true", cls(r.true_class)},
              {"policy", std::string(to_string(r.policy))}};
}

MetricsReport metrics_from_exact_json(const json& j) {
  auto cls = [](const json& c) {
    return ClassScores{c.at("precision").get<double>(), c.at("recall").get<double>(),
                       c.at("f1").get<double>(), c.at("support").get<std::size_t>()};
  };
  MetricsReport r;
  r.macro_f1 = j.at("macro_f1").get<double>();
  r.accuracy = j.at("accuracy").get<double>();
  r.resolution = j.at("resolution").get<double>();
  r.n_total = j.at("n_total").get<std::size_t>();
  r.n_resolved = j.at("n_resolved").get<std::size_t>();
  r.n_skipped = j.at("n_skipped").get<std::size_t>();
  r.false_class = cls(j.at("false"));
  r.true_class = cls(j.at("true"));
  r.policy = parse_abstain_policy(j.at("policy").get<std::string>());
  return r;
}

std::string render_metrics_table(std::span<const ReportRow> rows) {
  std::size_t name_width = std::string_view("Experiment").size();
  for (const auto& r : rows) name_width = std::max(name_width, r.experiment.size());
  std::string out;
  out += fmt::format("{:<{}}  {:>12}  {:>12}  {:>22}  {}\n", "Experiment", name_width, "Macro F1 (%)",
                     "Accuracy (%)", "Percent Resolution (%)", "Policy");
  for (const auto& r : rows) {
    out += fmt::format("{:<{}}  {:>12.2f}  {:>12.2f}  {:>22.2f}  {}\n", r.experiment, name_width,
                       round2(r.metrics.macro_f1), round2(r.metrics.accuracy),
                       round2(r.metrics.resolution), to_string(r.metrics.policy));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Category accuracy

std::string_view to_string(AgreementFilter f) {
  switch (f) {
    case AgreementFilter::MatchAny: return "match-any";
    case AgreementFilter::TwoOfThree: return "two-of-three";
    case AgreementFilter::Unanimous: return "unanimous";
  }
  return "match-any";
}

AgreementFilter parse_agreement_filter(std::string_view text) {
  if (text == "match-any" || text == "MatchAny") return AgreementFilter::MatchAny;
  if (text == "two-of-three" || text == "TwoOfThree") return AgreementFilter::TwoOfThree;
  if (text == "unanimous" || text == "Unanimous") return AgreementFilter::Unanimous;
  fail(ErrorCode::ConfigError, "unknown agreement filter '" + std::string(text) + "'");
}

std::optional<Category> majority_label(const std::vector<CategoryAnnotation>& labels) {
  for (const auto& a : labels) {
    auto n = std::count_if(labels.begin(), labels.end(),
                           [&](const auto& b) { return b.category == a.category; });
    if (n >= 2) return a.category;
  }
  return std::nullopt;
}

namespace {

Category plurality_label(const std::vector<CategoryAnnotation>& labels) {
  Category best = labels.front().category;
  std::ptrdiff_t best_n = 0;
  for (const auto& a : labels) {
    auto n = std::count_if(labels.begin(), labels.end(),
                           [&](const auto& b) { return b.category == a.category; });
    if (n > best_n) {
      best = a.category;
      best_n = n;
    }
  }
  return best;
}

}  // namespace

CategoryAccuracy category_accuracy(const std::map<std::string, Category>& preds,
                                   const Corpus& corpus, AgreementFilter filter) {
  CategoryAccuracy acc;
  acc.filter = filter;
  for (const auto& [id, predicted] : preds) {
    const auto* s = corpus.find(id);
    if (!s) fail(ErrorCode::UnknownStatementId, "prediction for unknown statement '" + id + "'");
    const auto& labels = s->annotations;
    if (labels.empty()) continue;

    bool hit = false;
    Category key{};
    switch (filter) {
      case AgreementFilter::MatchAny: {
        hit = std::any_of(labels.begin(), labels.end(),
                          [&](const auto& a) { return a.category == predicted; });
        key = hit ? predicted : plurality_label(labels);
        break;
      }
      case AgreementFilter::TwoOfThree: {
        auto majority = majority_label(labels);
        if (!majority) continue;
        key = *majority;
        hit = predicted == key;
        break;
      }
      case AgreementFilter::Unanimous: {
        if (labels.size() < 2) continue;
        bool same = std::all_of(labels.begin(), labels.end(),
                                [&](const auto& a) { return a.category == labels.front().category; });
        if (!same) continue;
        key = labels.front().category;
        hit = predicted == key;
        break;
      }
    }
    auto& t = acc.per_category[key];
    ++t.total;
    ++acc.overall.total;
    if (hit) {
      ++t.hits;
      ++acc.overall.hits;
    }
  }
  if (acc.overall.total == 0) {
    fail(ErrorCode::NoEligibleStatements,
         "no predicted statement meets the " + std::string(to_string(filter)) + " filter");
  }
  return acc;
}

json to_json(const CategoryAccuracy& acc) {
  json per = json::object();
  for (const auto& [c, t] : acc.per_category) per[std::string(1, letter_of(c))] = tally_json(t);
  return json{{"filter", std::string(to_string(acc.filter))},
              {"overall", tally_json(acc.overall)},
              {"per_category", per}};
}

// ---------------------------------------------------------------------------
// Routing share and agreement

RoutingShare routing_share(std::span<const RoutedCategory> items) {
  RoutingShare share;
  for (const auto& item : items) {
    auto& t = share.per_category[item.primary];
    ++t.total;
    ++share.overall.total;
    if (item.route == RouteValue::UserQuery) {
      ++t.hits;
      ++share.overall.hits;
    }
  }
  return share;
}

json to_json(const RoutingShare& share) {
  json per = json::object();
  for (const auto& [c, t] : share.per_category) {
    per[std::string(1, letter_of(c))] = json{{"user", t.hits},
                                             {"total", t.total},
                                             {"percent", round2(t.percent())},
                                             {"name", std::string(category_name(c))}};
  }
  return json{{"per_category", per},
              {"overall", {{"user", share.overall.hits},
                           {"total", share.overall.total},
                           {"percent", round2(share.overall.percent())}}}};
}

double pairwise_agreement(const std::map<std::string, std::string>& a,
                          const std::map<std::string, std::string>& b) {
  std::size_t overlap = 0, same = 0;
  for (const auto& [id, va] : a) {
    auto it = b.find(id);
    if (it == b.end()) continue;
    ++overlap;
    if (it->second == va) ++same;
  }
  if (overlap == 0) fail(ErrorCode::NoOverlap, "label sets share no ids");
  return 100.0 * static_cast<double>(same) / static_cast<double>(overlap);
}

}  // namespace clarify
