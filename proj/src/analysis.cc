#include "reccache/analysis.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "reccache/policies.h"

namespace reccache {

double OracleSolution::MinGap(ContentId k) const {
  double best = std::numeric_limits<double>::infinity();
  for (ContentId e : optimal) best = std::min(best, Gap(e, k));
  return best;
}

double OracleSolution::OptimalValue() const {
  double total = 0.0;
  for (ContentId e : optimal) total += score(e);
  return total;
}

std::vector<ContentId> OracleSolution::Suboptimal() const {
  std::vector<ContentId> out;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!in_optimal[i]) out.push_back(ContentId::FromIndex(i));
  }
  return out;
}

std::vector<double> RecommendationFreeScores(
    const PreferenceProfile& preferences, const AcceptanceProfile& acceptance) {
  if (preferences.num_users() != acceptance.num_users()) {
    throw std::invalid_argument("profiles disagree on the number of users");
  }
  std::vector<double> scores(preferences.num_contents(), 0.0);
  for (std::size_t u = 0; u < preferences.num_users(); ++u) {
    const double keep = 1.0 - acceptance[u];
    const auto row = preferences.row(u);
    for (std::size_t i = 0; i < row.size(); ++i) scores[i] += keep * row[i];
  }
  return scores;
}

OracleSolution SolveOracle(const PreferenceProfile& preferences,
                           const AcceptanceProfile& acceptance,
                           std::size_t capacity) {
  OracleSolution sol;
  sol.scores = RecommendationFreeScores(preferences, acceptance);
  sol.optimal = SelectCache(sol.scores, capacity);
  sol.in_optimal.assign(sol.scores.size(), 0);
  for (ContentId e : sol.optimal) sol.in_optimal[e.index()] = 1;
  return sol;
}

double InstantRegretHat(std::span<const ContentId> cache,
                        const OracleSolution& oracle) {
  double played = 0.0;
  for (ContentId i : cache) played += oracle.score(i);
  return oracle.OptimalValue() - played;
}

RegretSeries RegretHat(std::span<const std::vector<ContentId>> caches,
                       const OracleSolution& oracle) {
  RegretSeries series;
  series.instantaneous.reserve(caches.size());
  series.cumulative.reserve(caches.size());
  double total = 0.0;
  for (const auto& cache : caches) {
    if (cache.size() != oracle.optimal.size()) {
      throw std::invalid_argument("cache size differs from capacity");
    }
    const double r = InstantRegretHat(cache, oracle);
    total += r;
    series.instantaneous.push_back(r);
    series.cumulative.push_back(total);
  }
  return series;
}

Decision OptimalDecision(const OracleSolution& oracle,
                         const CatalogConfig& catalog) {
  Decision best;
  best.cache = oracle.optimal;
  best.recs = SelectRecommendations(best.cache, oracle.scores,
                                    catalog.recs_per_user, catalog.num_users,
                                    /*shared=*/true);
  return best;
}

RegretSeries RegretReq(std::span<const Decision> decisions,
                       const ProblemInstance& instance,
                       const OracleSolution& oracle) {
  const auto& cat = instance.catalog;
  const Decision best = OptimalDecision(oracle, cat);
  const auto best_rates = ExactRequestVector(best, instance);
  double benchmark = 0.0;
  for (ContentId e : best.cache) benchmark += best_rates[e.index()];

  RegretSeries series;
  double total = 0.0;
  for (const auto& decision : decisions) {
    for (const auto& list : decision.recs) {
      if (list.size() != cat.recs_per_user) {
        throw std::invalid_argument(
            "regret from request rates needs exactly R recommendations per user");
      }
    }
    const auto rates = ExactRequestVector(decision, instance);
    double played = 0.0;
    for (ContentId i : decision.cache) played += rates[i.index()];
    const double r = benchmark - played;
    total += r;
    series.instantaneous.push_back(r);
    series.cumulative.push_back(total);
  }
  return series;
}

bool BoundApplies(double wbar, double eta) {
  return 4.0 * std::pow(1.0 - wbar, 1.0 / eta) - 1.0 > kGapTolerance;
}

BoundResult TheoremBound(const OracleSolution& oracle,
                         const BoundParams& params) {
  BoundResult result;
  const double w = params.wbar;
  if (!(w >= 0.0 && w <= 1.0)) {
    result.error = "mean acceptance outside [0,1]";
    return result;
  }
  if (!BoundApplies(w, params.eta)) {
    result.error = "mean acceptance must be below 1 - 4^-eta";
    return result;
  }
  if (params.horizon < 1) {
    result.error = "horizon must be at least 1";
    return result;
  }
  const double shrink = std::pow(1.0 - w, 1.0 / params.eta);
  const double log_t = std::log(static_cast<double>(params.horizon));
  const double users_sq = static_cast<double>(params.num_users) *
                          static_cast<double>(params.num_users);
  const double tail = 2.0 * std::exp(-params.alpha * w) / (4.0 * shrink - 1.0);

  double gap_term = 0.0;
  double constant_term = 0.0;
  for (ContentId k : oracle.Suboptimal()) {
    const double min_gap = oracle.MinGap(k);
    if (min_gap < kGapTolerance) {
      result.excluded.push_back(k);
      continue;
    }
    gap_term += (16.0 * shrink * log_t + 4.0 * params.alpha * w) / min_gap;
    for (ContentId e : oracle.optimal) constant_term += oracle.Gap(e, k) * tail;
  }
  result.value = users_sq * gap_term + constant_term;
  return result;
}

HitRateSeries HitRate(std::span<const ObservedBatch> observed,
                      std::size_t num_users) {
  HitRateSeries series;
  long hits = 0;
  for (std::size_t t = 0; t < observed.size(); ++t) {
    const long slot_hits = observed[t].total();
    hits += slot_hits;
    series.per_slot.push_back(static_cast<double>(slot_hits) /
                              static_cast<double>(num_users));
    series.cumulative.push_back(static_cast<double>(hits) /
                                (static_cast<double>(num_users) *
                                 static_cast<double>(t + 1)));
  }
  return series;
}

MeanStat Summarize(std::span<const double> samples) {
  MeanStat stat;
  if (samples.empty()) return stat;
  const double n = static_cast<double>(samples.size());
  stat.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  if (samples.size() >= 2) {
    double ss = 0.0;
    for (double x : samples) ss += (x - stat.mean) * (x - stat.mean);
    stat.standard_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return stat;
}

}  // namespace reccache
