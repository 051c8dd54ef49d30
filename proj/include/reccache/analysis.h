#ifndef RECCACHE_ANALYSIS_H_
#define RECCACHE_ANALYSIS_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "reccache/environment.h"
#include "reccache/model.h"

namespace reccache {

/// Gaps below this are treated as ties on the optimal boundary.
inline constexpr double kGapTolerance = 1e-12;

/// Ground truth for one instance: the optimal cache and the
/// recommendation-free scores p^_i = sum_u (1 - w_u) p_u^pref(i).
struct OracleSolution {
  std::vector<ContentId> optimal;  // sorted by id
  std::vector<double> scores;      // indexed by content index
  std::vector<char> in_optimal;    // indexed by content index

  bool IsOptimal(ContentId id) const { return in_optimal[id.index()] != 0; }
  double score(ContentId id) const { return scores[id.index()]; }
  /// Delta_{e,k} = p^_e - p^_k.
  double Gap(ContentId e, ContentId k) const { return score(e) - score(k); }
  /// Delta_min,k = min over e in the optimal set of Delta_{e,k}.
  double MinGap(ContentId k) const;
  /// Sum of scores over the optimal set.
  double OptimalValue() const;
  /// Contents outside the optimal set, ascending.
  std::vector<ContentId> Suboptimal() const;
};

std::vector<double> RecommendationFreeScores(
    const PreferenceProfile& preferences, const AcceptanceProfile& acceptance);

/// Top-C contents by p^_i, ties by smallest id.
OracleSolution SolveOracle(const PreferenceProfile& preferences,
                           const AcceptanceProfile& acceptance,
                           std::size_t capacity);

struct RegretSeries {
  std::vector<double> instantaneous;
  std::vector<double> cumulative;
};

/// Regret in recommendation-free form: per slot, sum of p^ over the optimal
/// set minus sum of p^ over the played cache.
RegretSeries RegretHat(std::span<const std::vector<ContentId>> caches,
                       const OracleSolution& oracle);

/// Instantaneous regret of one cache set in recommendation-free form.
double InstantRegretHat(std::span<const ContentId> cache,
                        const OracleSolution& oracle);

/// Regret from the aggregate request rates p_i = sum_u p_u^req(i) under each
/// slot's actual recommendations. The benchmark caches the optimal set and
/// recommends its top-R contents by p^ to every user. Throws
/// std::invalid_argument if any list does not have exactly R entries.
RegretSeries RegretReq(std::span<const Decision> decisions,
                       const ProblemInstance& instance,
                       const OracleSolution& oracle);

/// The benchmark decision used by RegretReq.
Decision OptimalDecision(const OracleSolution& oracle,
                         const CatalogConfig& catalog);

struct BoundParams {
  std::size_t num_users = 1;
  double alpha = 5.0;
  double eta = 4.0;
  double wbar = 0.0;
  std::size_t horizon = 1;
};

struct BoundResult {
  std::optional<double> value;
  /// Set when the bound does not apply.
  std::string error;
  /// Suboptimal contents left out because their gap is zero.
  std::vector<ContentId> excluded;

  bool ok() const { return value.has_value(); }
};

/// Gap-dependent upper bound on expected regret of the known-acceptance UCB
/// policy:
///   U^2 sum_k [16 (1-w)^(1/eta) log T + 4 alpha w] / Delta_min,k
///   + sum_k sum_e Delta_{e,k} * 2 e^(-alpha w) / (4 (1-w)^(1/eta) - 1).
/// Requires w < 1 - 4^-eta, where the denominator is positive.
BoundResult TheoremBound(const OracleSolution& oracle,
                         const BoundParams& params);

/// Whether the bound's precondition holds for the mean acceptance.
bool BoundApplies(double wbar, double eta);

struct HitRateSeries {
  std::vector<double> per_slot;
  std::vector<double> cumulative;
};

/// Fraction of the U requests per slot that were served from the cache.
HitRateSeries HitRate(std::span<const ObservedBatch> observed,
                      std::size_t num_users);

struct MeanStat {
  double mean = 0.0;
  std::optional<double> standard_error;  // needs at least two samples
};

MeanStat Summarize(std::span<const double> samples);

}  // namespace reccache

#endif  // RECCACHE_ANALYSIS_H_
