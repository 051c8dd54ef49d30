#ifndef RECCACHE_POLICIES_H_
#define RECCACHE_POLICIES_H_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "reccache/environment.h"
#include "reccache/model.h"

namespace reccache {

/// Mean acceptance assumed by the unknown-acceptance policy until some
/// content has been observed both recommended and not recommended.
inline constexpr double kWbarPrior = 0.5;

/// Per-content bandit statistics.
///
/// Every content starts with one synthetic pull and zero reward, so n_i >= 1
/// throughout. The synthetic pull belongs to neither the recommended nor the
/// non-recommended partition: rec_slots + nonrec_slots + 1 == pulls.
class PolicyState {
 public:
  /// `correction_weights[u][k]` is the expected number of extra requests user
  /// u sends to position k+1 of its list, w_u p_u^rec(k+1) (w_u / R for the
  /// uniform induced distribution). Leave empty to skip the
  /// recommendation-corrected bookkeeping.
  explicit PolicyState(std::size_t num_contents,
                       std::vector<std::vector<double>> correction_weights = {});

  std::size_t num_contents() const { return pulls_.size(); }

  long pulls(ContentId i) const { return pulls_[i.index()]; }
  long reward_sum(ContentId i) const { return reward_sum_[i.index()]; }
  double correction(ContentId i) const { return correction_[i.index()]; }

  long rec_slots(ContentId i) const { return rec_slots_[i.index()]; }
  long rec_reward(ContentId i) const { return rec_reward_[i.index()]; }
  long nonrec_slots(ContentId i) const { return nonrec_slots_[i.index()]; }
  long nonrec_reward(ContentId i) const { return nonrec_reward_[i.index()]; }

  /// S_i / n_i.
  double RawEstimate(ContentId i) const;
  /// (S_i - correction_i) / n_i, the recommendation-free score estimate.
  double CorrectedEstimate(ContentId i) const;
  /// (S_i - |tau_i| * boost) / n_i, for shared lists when only an estimate of
  /// the per-slot recommendation boost U * wbar / R is available.
  double CorrectedEstimate(ContentId i, double boost_per_rec_slot) const;

  bool tracks_correction() const { return !correction_weights_.empty(); }

  /// Applies one slot of feedback. Throws std::invalid_argument when the
  /// observation was not masked against `decision.cache`.
  void Update(const ObservedBatch& observed, const Decision& decision);

 private:
  std::vector<std::vector<double>> correction_weights_;
  std::vector<long> pulls_;
  std::vector<long> reward_sum_;
  std::vector<double> correction_;
  std::vector<long> rec_slots_;
  std::vector<long> rec_reward_;
  std::vector<long> nonrec_slots_;
  std::vector<long> nonrec_reward_;
  std::vector<char> recommended_scratch_;
};

struct UcbParams {
  double alpha = 5.0;
  double eta = 4.0;
  std::size_t num_users = 1;
};

/// U * sqrt(2 (1-wbar)^(1/eta) log t / n + alpha wbar / (2 n)).
/// Throws std::invalid_argument if wbar is outside [0,1] or t < 1.
double ConfidenceRadius(long pulls, std::size_t t, double wbar,
                        const UcbParams& params);

/// U * sqrt(1.5 log t / n), the CombUCB1 radius on rewards in [0, U].
double CombUcbRadius(long pulls, std::size_t t, std::size_t num_users);

/// p_i(t) + D_i(t). With kRecommendationCorrected the state must track
/// corrections.
double UcbIndex(ContentId i, const PolicyState& state, std::size_t t,
                const UcbParams& params, double wbar,
                EstimatorVariant estimator = EstimatorVariant::kRaw);

/// Same radical with the estimated mean acceptance in place of the truth.
/// The corrected estimator subtracts U * wbar_estimate / R per recommended
/// slot, which assumes shared lists.
double UcbIndexUnknownW(ContentId i, const PolicyState& state, std::size_t t,
                        const UcbParams& params, double wbar_estimate,
                        EstimatorVariant estimator = EstimatorVariant::kRaw,
                        std::size_t recs_per_user = 1);

/// Content indices sorted by descending value, ties by smallest id.
std::vector<ContentId> RankByIndex(std::span<const double> indices);

/// The C contents with the largest index (ties by smallest id), sorted by id.
std::vector<ContentId> SelectCache(std::span<const double> indices,
                                   std::size_t capacity);

/// Per-user ordered lists of R cached contents. kTopIndex takes the highest
/// indices (position 1 = highest); kSeededRandom needs `rng`.
std::vector<std::vector<ContentId>> SelectRecommendations(
    std::span<const ContentId> cache, std::span<const double> indices,
    std::size_t recs_per_user, std::size_t num_users, bool shared,
    RecommendationRule rule = RecommendationRule::kTopIndex,
    std::mt19937_64* rng = nullptr);

/// Mean-acceptance estimate from the recommended / non-recommended partition
/// means, (R / (U N)) sum_i (p~_i - p^_i), clamped to [0,1]. Contents missing
/// either partition contribute zero.
double EstimateWbar(const PolicyState& state, std::size_t num_users,
                    std::size_t recs_per_user);

/// True once some content has both partitions non-empty.
bool HasWbarEvidence(const PolicyState& state);

/// EstimateWbar, or kWbarPrior before any evidence exists.
double CurrentWbar(const PolicyState& state, std::size_t num_users,
                   std::size_t recs_per_user);

/// Uniform step contract: Decide(t) then Ingest(observation, decision).
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string_view id() const = 0;
  virtual Decision Decide(std::size_t t) = 0;
  virtual void Ingest(const ObservedBatch& observed, const Decision& decision);
  /// Current mean-acceptance estimate, for policies that keep one.
  virtual std::optional<double> WbarEstimate() const { return std::nullopt; }

  const PolicyState& state() const { return state_; }
  /// Whether decisions carry R recommendations per user.
  virtual bool recommends() const { return true; }

 protected:
  explicit Policy(PolicyState state) : state_(std::move(state)) {}

  PolicyState state_;
};

struct PolicyContext {
  CatalogConfig catalog;
  AlgorithmConfig algo;
  /// True acceptances; used by known-acceptance policies and for the
  /// recommendation-corrected estimator.
  AcceptanceProfile acceptance;
  /// Positional choice model behind the corrected estimator.
  InducedDistributionSpec induced;
};

/// w_u p_u^rec(k) for every user and list position, as used by PolicyState.
std::vector<std::vector<double>> CorrectionWeights(
    const AcceptanceProfile& acceptance, const InducedDistributionSpec& induced,
    std::size_t recs_per_user);

/// Builds a policy by its stable id. Throws std::invalid_argument for an
/// unknown id, or when the config does not suit the policy.
std::unique_ptr<Policy> MakePolicy(std::string_view id,
                                   const PolicyContext& context,
                                   std::uint64_t seed);

}  // namespace reccache

#endif  // RECCACHE_POLICIES_H_
