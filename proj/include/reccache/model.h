#ifndef RECCACHE_MODEL_H_
#define RECCACHE_MODEL_H_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace reccache {

/// Tolerance used when checking that probability vectors are normalized.
inline constexpr double kProbabilityTolerance = 1e-9;

/// Content identifier, 1-based and dense over the catalog {1..N}.
class ContentId {
 public:
  constexpr ContentId() = default;
  constexpr explicit ContentId(std::size_t value) : value_(value) {}

  constexpr std::size_t value() const { return value_; }
  /// Zero-based position in per-content arrays.
  constexpr std::size_t index() const { return value_ - 1; }

  static constexpr ContentId FromIndex(std::size_t index) {
    return ContentId(index + 1);
  }

  friend constexpr auto operator<=>(ContentId, ContentId) = default;

 private:
  std::size_t value_ = 0;
};

struct CatalogConfig {
  std::size_t num_contents = 0;      // N
  std::size_t num_users = 0;         // U
  std::size_t cache_capacity = 0;    // C
  std::size_t recs_per_user = 0;     // R
  std::size_t horizon = 0;           // T
};

/// Per-user base request distribution p_u^pref over the catalog. Users are
/// zero-based row indices.
class PreferenceProfile {
 public:
  PreferenceProfile() = default;

  /// Validates every row (entries in [0,1], sum within tolerance) and
  /// renormalizes once. Throws std::invalid_argument otherwise.
  static PreferenceProfile FromRows(
      const std::vector<std::vector<double>>& rows);

  std::size_t num_users() const { return num_users_; }
  std::size_t num_contents() const { return num_contents_; }

  double operator()(std::size_t user, ContentId content) const {
    return values_[user * num_contents_ + content.index()];
  }
  std::span<const double> row(std::size_t user) const {
    return {values_.data() + user * num_contents_, num_contents_};
  }

 private:
  std::size_t num_users_ = 0;
  std::size_t num_contents_ = 0;
  std::vector<double> values_;
};

/// Per-user recommendation acceptance probabilities w_u^rec.
class AcceptanceProfile {
 public:
  AcceptanceProfile() = default;
  explicit AcceptanceProfile(std::vector<double> acceptance);

  std::size_t num_users() const { return values_.size(); }
  double operator[](std::size_t user) const { return values_[user]; }
  std::span<const double> values() const { return values_; }
  double mean() const { return mean_; }
  double sum() const { return sum_; }

 private:
  std::vector<double> values_;
  double mean_ = 0.0;
  double sum_ = 0.0;
};

enum class InducedKind { kUniform, kZipf };

/// How users choose among their recommended list. For Zipf, betas holds one
/// exponent per user.
struct InducedDistributionSpec {
  InducedKind kind = InducedKind::kUniform;
  std::vector<double> betas;

  static InducedDistributionSpec Uniform() { return {}; }
  static InducedDistributionSpec Zipf(std::vector<double> betas) {
    return {InducedKind::kZipf, std::move(betas)};
  }
};

/// One slot's cache set and per-user ordered recommendation lists.
/// cache is kept sorted ascending; recs[u][k] is the content at position k+1.
/// An empty list means nothing was recommended to that user, who then
/// requests from its preference distribution alone.
struct Decision {
  std::vector<ContentId> cache;
  std::vector<std::vector<ContentId>> recs;

  bool caches(ContentId content) const;
};

/// Returns an empty string when the decision is valid for the catalog,
/// otherwise a description of the first violated invariant. Unless
/// `require_recommendations` is set, empty lists are accepted.
std::string CheckDecision(const Decision& decision,
                          const CatalogConfig& catalog,
                          bool require_recommendations = true);

/// Throws std::invalid_argument if CheckDecision reports a violation.
void RequireValidDecision(const Decision& decision,
                          const CatalogConfig& catalog,
                          bool require_recommendations = true);

/// Everything the environment and the oracle need about one problem
/// instance. Built per run from an ExperimentConfig.
struct ProblemInstance {
  CatalogConfig catalog;
  PreferenceProfile preferences;
  AcceptanceProfile acceptance;
  InducedDistributionSpec induced;
};

// ---------------------------------------------------------------------------
// Experiment configuration (unresolved; generators are expanded per run).

enum class PreferenceKind { kZipf, kMatrix };

/// kNone keeps the identity ranking for every user, kShared draws one
/// permutation of ranks for all users, kPerUser draws one per user.
enum class RankPermutation { kNone, kShared, kPerUser };

struct PreferenceConfig {
  PreferenceKind kind = PreferenceKind::kZipf;
  double exponent = 1.0;
  RankPermutation permute = RankPermutation::kNone;
  std::optional<std::string> matrix_path;
  std::vector<std::vector<double>> matrix;  // filled for kMatrix
};

enum class AcceptanceKind { kConstant, kList, kInterval };

struct AcceptanceConfig {
  AcceptanceKind kind = AcceptanceKind::kConstant;
  double value = 0.0;
  std::vector<double> values;
  double low = 0.0;
  double high = 0.0;
};

struct InducedConfig {
  InducedKind kind = InducedKind::kUniform;
  std::optional<double> beta;
  std::optional<std::pair<double, double>> beta_interval;
  std::vector<double> betas;  // explicit per-user list
};

enum class EstimatorVariant { kRaw, kRecommendationCorrected };

enum class RecommendationRule { kTopIndex, kFirstById, kSeededRandom };

struct AlgorithmConfig {
  double alpha = 5.0;
  double eta = 4.0;
  double epsilon = 0.4;
  EstimatorVariant estimator = EstimatorVariant::kRaw;
  bool shared_recs = true;
  bool baseline_recommends = true;
  RecommendationRule rec_rule = RecommendationRule::kTopIndex;
};

struct RunConfig {
  std::vector<std::string> policies;
  std::size_t runs = 1;
  std::uint64_t seed = 0;
};

struct ExperimentConfig {
  CatalogConfig catalog;
  PreferenceConfig preferences;
  AcceptanceConfig acceptance;
  InducedConfig induced;
  AlgorithmConfig algo;
  RunConfig run;
};

struct ValidationReport {
  std::vector<std::string> violations;
  /// Non-fatal findings, e.g. the regret-bound precondition not holding.
  std::vector<std::string> warnings;

  bool ok() const { return violations.empty(); }
};

ValidationReport ValidateConfig(const ExperimentConfig& config);

/// w_u p_u^rec(i) + (1 - w_u) p_u^pref(i). Throws std::out_of_range for an
/// unknown user or content.
double RequestProbability(std::size_t user, ContentId content,
                          const Decision& decision,
                          const AcceptanceProfile& acceptance,
                          const PreferenceProfile& preferences,
                          const InducedDistributionSpec& induced);

/// Probability mass the induced distribution puts on 1-based list position
/// `position` of a list of length `list_size`.
double InducedPositionWeight(const InducedDistributionSpec& induced,
                             std::size_t user, std::size_t position,
                             std::size_t list_size);

/// Full request distribution of one user under a decision.
std::vector<double> RequestDistribution(std::size_t user,
                                        const Decision& decision,
                                        const ProblemInstance& instance);

/// Zipf weights k^-s over ranks 1..n, normalized.
std::vector<double> ZipfWeights(std::size_t n, double exponent);

PreferenceProfile BuildPreferences(const PreferenceConfig& config,
                                   const CatalogConfig& catalog,
                                   std::mt19937_64& rng);

AcceptanceProfile BuildAcceptance(const AcceptanceConfig& config,
                                  std::size_t num_users, std::mt19937_64& rng);

InducedDistributionSpec BuildInduced(const InducedConfig& config,
                                     std::size_t num_users,
                                     std::mt19937_64& rng);

/// Resolves every generator in the config into a concrete instance.
ProblemInstance BuildInstance(const ExperimentConfig& config,
                              std::mt19937_64& rng);

std::string ToString(EstimatorVariant variant);
std::string ToString(RecommendationRule rule);
std::string ToString(RankPermutation permutation);

}  // namespace reccache

#endif  // RECCACHE_MODEL_H_
