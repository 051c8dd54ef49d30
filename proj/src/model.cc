#include "reccache/model.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "reccache/policy_ids.h"

namespace reccache {
namespace {

// Returns an empty string if `row` is a probability vector within tolerance.
std::string CheckDistribution(std::span<const double> row) {
  double sum = 0.0;
  for (double p : row) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      return "entry outside [0,1]";
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    std::ostringstream os;
    os << "row not normalized (sum " << sum << ")";
    return os.str();
  }
  return {};
}

}  // namespace

PreferenceProfile PreferenceProfile::FromRows(
    const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) {
    throw std::invalid_argument("preference matrix is empty");
  }
  PreferenceProfile profile;
  profile.num_users_ = rows.size();
  profile.num_contents_ = rows.front().size();
  profile.values_.reserve(profile.num_users_ * profile.num_contents_);
  for (std::size_t u = 0; u < rows.size(); ++u) {
    const auto& row = rows[u];
    if (row.size() != profile.num_contents_) {
      throw std::invalid_argument("preference matrix is ragged");
    }
    if (auto err = CheckDistribution(row); !err.empty()) {
      throw std::invalid_argument("preference row " + std::to_string(u + 1) +
                                  ": " + err);
    }
    const double sum = std::accumulate(row.begin(), row.end(), 0.0);
    for (double p : row) profile.values_.push_back(p / sum);
  }
  return profile;
}

AcceptanceProfile::AcceptanceProfile(std::vector<double> acceptance)
    : values_(std::move(acceptance)) {
  if (values_.empty()) {
    throw std::invalid_argument("acceptance profile is empty");
  }
  for (double w : values_) {
    if (!std::isfinite(w) || w < 0.0 || w > 1.0) {
      throw std::invalid_argument("acceptance probability outside [0,1]");
    }
  }
  sum_ = std::accumulate(values_.begin(), values_.end(), 0.0);
  mean_ = sum_ / static_cast<double>(values_.size());
}

bool Decision::caches(ContentId content) const {
  return std::binary_search(cache.begin(), cache.end(), content);
}

std::string CheckDecision(const Decision& decision,
                          const CatalogConfig& catalog,
                          bool require_recommendations) {
  const std::size_t n = catalog.num_contents;
  if (decision.cache.size() != catalog.cache_capacity) {
    return "cache size differs from capacity";
  }
  if (!std::is_sorted(decision.cache.begin(), decision.cache.end())) {
    return "cache not sorted";
  }
  for (std::size_t k = 0; k < decision.cache.size(); ++k) {
    const auto id = decision.cache[k].value();
    if (id < 1 || id > n) return "cache id out of range";
    if (k > 0 && decision.cache[k - 1] == decision.cache[k]) {
      return "duplicate cache id";
    }
  }
  if (decision.recs.size() != catalog.num_users) {
    return "recommendation lists do not cover every user";
  }
  for (const auto& list : decision.recs) {
    if (list.empty() && !require_recommendations) continue;
    if (list.size() != catalog.recs_per_user) {
      return "recommendation list length differs from R";
    }
    std::set<ContentId> seen;
    for (ContentId id : list) {
      if (!decision.caches(id)) return "recommended content not cached";
      if (!seen.insert(id).second) return "duplicate recommendation";
    }
  }
  return {};
}

void RequireValidDecision(const Decision& decision,
                          const CatalogConfig& catalog,
                          bool require_recommendations) {
  if (auto err = CheckDecision(decision, catalog, require_recommendations);
      !err.empty()) {
    throw std::invalid_argument("invalid decision: " + err);
  }
}

ValidationReport ValidateConfig(const ExperimentConfig& config) {
  ValidationReport report;
  auto fail = [&](std::string msg) {
    report.violations.push_back(std::move(msg));
  };
  const auto& cat = config.catalog;
  if (cat.num_contents < 1) fail("N must be at least 1");
  if (cat.num_users < 1) fail("U must be at least 1");
  if (cat.horizon < 1) fail("T must be at least 1");
  if (cat.recs_per_user < 1) fail("R must be at least 1");
  if (cat.recs_per_user > cat.cache_capacity) fail("R exceeds C");
  if (cat.cache_capacity > cat.num_contents) fail("C exceeds N");

  const auto& prefs = config.preferences;
  if (prefs.kind == PreferenceKind::kZipf) {
    if (!std::isfinite(prefs.exponent) || prefs.exponent < 0.0) {
      fail("preference exponent must be non-negative");
    }
  } else {
    if (prefs.matrix.size() != cat.num_users) {
      fail("preference matrix must have U rows");
    }
    for (std::size_t u = 0; u < prefs.matrix.size(); ++u) {
      const auto& row = prefs.matrix[u];
      if (row.size() != cat.num_contents) {
        fail("preference row " + std::to_string(u + 1) + " must have N entries");
        continue;
      }
      if (auto err = CheckDistribution(row); !err.empty()) {
        fail("preference row " + std::to_string(u + 1) + ": " + err);
      }
    }
  }

  const auto& acc = config.acceptance;
  auto in_unit = [](double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; };
  double worst_mean = 0.0;
  switch (acc.kind) {
    case AcceptanceKind::kConstant:
      if (!in_unit(acc.value)) fail("acceptance value outside [0,1]");
      worst_mean = acc.value;
      break;
    case AcceptanceKind::kList:
      if (acc.values.size() != cat.num_users) {
        fail("acceptance list must have U entries");
      }
      if (!std::all_of(acc.values.begin(), acc.values.end(), in_unit)) {
        fail("acceptance value outside [0,1]");
      }
      if (!acc.values.empty()) {
        worst_mean = std::accumulate(acc.values.begin(), acc.values.end(), 0.0) /
                     static_cast<double>(acc.values.size());
      }
      break;
    case AcceptanceKind::kInterval:
      if (!in_unit(acc.low) || !in_unit(acc.high) || acc.low > acc.high) {
        fail("acceptance interval must satisfy 0 <= low <= high <= 1");
      }
      worst_mean = acc.high;
      break;
  }

  const auto& ind = config.induced;
  if (ind.kind == InducedKind::kZipf) {
    if (ind.beta && !(*ind.beta >= 0.0)) fail("beta must be non-negative");
    if (ind.beta_interval) {
      auto [lo, hi] = *ind.beta_interval;
      if (!(lo >= 0.0) || !(hi >= lo)) fail("beta interval must satisfy 0 <= low <= high");
    }
    if (!ind.betas.empty()) {
      if (ind.betas.size() != cat.num_users) fail("beta list must have U entries");
      for (double b : ind.betas) {
        if (!(b >= 0.0)) fail("beta must be non-negative");
      }
    }
    if (!ind.beta && !ind.beta_interval && ind.betas.empty()) {
      fail("Zipf induced distribution needs beta, beta_interval or betas");
    }
  }

  const auto& algo = config.algo;
  if (!(algo.alpha > 0.0)) fail("alpha must be positive");
  if (!(algo.eta > 0.0)) fail("eta must be positive");
  if (!(algo.epsilon >= 0.0 && algo.epsilon <= 1.0)) {
    fail("epsilon outside [0,1]");
  }

  const auto& run = config.run;
  if (run.runs < 1) fail("runs must be at least 1");
  if (run.policies.empty()) fail("policy roster is empty");
  std::set<std::string> seen;
  for (const auto& id : run.policies) {
    if (!IsKnownPolicy(id)) fail("unknown policy '" + id + "'");
    if (!seen.insert(id).second) fail("duplicate policy '" + id + "'");
    if (RequiresSharedRecommendations(id) && !algo.shared_recs) {
      fail("policy '" + id + "' requires shared recommendations");
    }
  }

  if (algo.eta > 0.0 && seen.count(std::string(kUcbRec)) > 0) {
    const double limit = 1.0 - std::pow(4.0, -algo.eta);
    if (worst_mean > limit) {
      report.warnings.push_back(
          "mean acceptance may exceed 1 - 4^-eta; regret bound not applicable");
    }
  }
  return report;
}

double InducedPositionWeight(const InducedDistributionSpec& induced,
                             std::size_t user, std::size_t position,
                             std::size_t list_size) {
  if (position < 1 || position > list_size) return 0.0;
  if (induced.kind == InducedKind::kUniform) {
    return 1.0 / static_cast<double>(list_size);
  }
  const double beta = induced.betas.at(user);
  double norm = 0.0;
  for (std::size_t j = 1; j <= list_size; ++j) {
    norm += std::pow(static_cast<double>(j), -beta);
  }
  return std::pow(static_cast<double>(position), -beta) / norm;
}

double RequestProbability(std::size_t user, ContentId content,
                          const Decision& decision,
                          const AcceptanceProfile& acceptance,
                          const PreferenceProfile& preferences,
                          const InducedDistributionSpec& induced) {
  if (user >= preferences.num_users() || user >= acceptance.num_users() ||
      user >= decision.recs.size()) {
    throw std::out_of_range("unknown user id");
  }
  if (content.value() < 1 || content.value() > preferences.num_contents()) {
    throw std::out_of_range("unknown content id");
  }
  const auto& list = decision.recs[user];
  double induced_mass = 0.0;
  for (std::size_t k = 0; k < list.size(); ++k) {
    if (list[k] == content) {
      induced_mass = InducedPositionWeight(induced, user, k + 1, list.size());
      break;
    }
  }
  const double w = list.empty() ? 0.0 : acceptance[user];
  return w * induced_mass + (1.0 - w) * preferences(user, content);
}

std::vector<double> RequestDistribution(std::size_t user,
                                        const Decision& decision,
                                        const ProblemInstance& instance) {
  const auto& list = decision.recs.at(user);
  const double w = list.empty() ? 0.0 : instance.acceptance[user];
  const auto pref = instance.preferences.row(user);
  std::vector<double> dist(pref.size());
  for (std::size_t i = 0; i < pref.size(); ++i) dist[i] = (1.0 - w) * pref[i];
  for (std::size_t k = 0; k < list.size(); ++k) {
    dist[list[k].index()] +=
        w * InducedPositionWeight(instance.induced, user, k + 1, list.size());
  }
  return dist;
}

std::vector<double> ZipfWeights(std::size_t n, double exponent) {
  if (!std::isfinite(exponent) || exponent < 0.0) {
    throw std::invalid_argument("Zipf exponent must be non-negative");
  }
  std::vector<double> weights(n);
  for (std::size_t k = 0; k < n; ++k) {
    weights[k] = std::pow(static_cast<double>(k + 1), -exponent);
  }
  const double norm = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (double& x : weights) x /= norm;
  return weights;
}

PreferenceProfile BuildPreferences(const PreferenceConfig& config,
                                   const CatalogConfig& catalog,
                                   std::mt19937_64& rng) {
  if (config.kind == PreferenceKind::kMatrix) {
    return PreferenceProfile::FromRows(config.matrix);
  }
  const std::size_t n = catalog.num_contents;
  const auto weights = ZipfWeights(n, config.exponent);
  std::vector<std::size_t> ranking(n);
  std::iota(ranking.begin(), ranking.end(), 0);
  if (config.permute == RankPermutation::kShared) {
    std::shuffle(ranking.begin(), ranking.end(), rng);
  }
  std::vector<std::vector<double>> rows(catalog.num_users,
                                        std::vector<double>(n));
  for (auto& row : rows) {
    if (config.permute == RankPermutation::kPerUser) {
      std::iota(ranking.begin(), ranking.end(), 0);
      std::shuffle(ranking.begin(), ranking.end(), rng);
    }
    // ranking[r] is the content holding popularity rank r.
    for (std::size_t r = 0; r < n; ++r) row[ranking[r]] = weights[r];
  }
  return PreferenceProfile::FromRows(rows);
}

AcceptanceProfile BuildAcceptance(const AcceptanceConfig& config,
                                  std::size_t num_users,
                                  std::mt19937_64& rng) {
  switch (config.kind) {
    case AcceptanceKind::kConstant:
      return AcceptanceProfile(std::vector<double>(num_users, config.value));
    case AcceptanceKind::kList:
      if (config.values.size() != num_users) {
        throw std::invalid_argument("acceptance list must have U entries");
      }
      return AcceptanceProfile(config.values);
    case AcceptanceKind::kInterval: {
      std::uniform_real_distribution<double> dist(config.low, config.high);
      std::vector<double> values(num_users);
      for (double& w : values) w = dist(rng);
      return AcceptanceProfile(std::move(values));
    }
  }
  throw std::logic_error("unhandled acceptance kind");
}

InducedDistributionSpec BuildInduced(const InducedConfig& config,
                                     std::size_t num_users,
                                     std::mt19937_64& rng) {
  if (config.kind == InducedKind::kUniform) {
    return InducedDistributionSpec::Uniform();
  }
  std::vector<double> betas;
  if (!config.betas.empty()) {
    betas = config.betas;
  } else if (config.beta_interval) {
    std::uniform_real_distribution<double> dist(config.beta_interval->first,
                                                config.beta_interval->second);
    betas.resize(num_users);
    for (double& b : betas) b = dist(rng);
  } else if (config.beta) {
    betas.assign(num_users, *config.beta);
  }
  if (betas.size() != num_users) {
    throw std::invalid_argument("Zipf induced distribution needs U exponents");
  }
  for (double b : betas) {
    if (!(b >= 0.0)) throw std::invalid_argument("beta must be non-negative");
  }
  return InducedDistributionSpec::Zipf(std::move(betas));
}

ProblemInstance BuildInstance(const ExperimentConfig& config,
                              std::mt19937_64& rng) {
  ProblemInstance instance;
  instance.catalog = config.catalog;
  instance.preferences =
      BuildPreferences(config.preferences, config.catalog, rng);
  instance.acceptance =
      BuildAcceptance(config.acceptance, config.catalog.num_users, rng);
  instance.induced =
      BuildInduced(config.induced, config.catalog.num_users, rng);
  return instance;
}

std::string ToString(EstimatorVariant variant) {
  return variant == EstimatorVariant::kRaw ? "raw" : "recommendation_corrected";
}

std::string ToString(RecommendationRule rule) {
  switch (rule) {
    case RecommendationRule::kTopIndex: return "top_index";
    case RecommendationRule::kFirstById: return "first_by_id";
    case RecommendationRule::kSeededRandom: return "seeded_random";
  }
  return "unknown";
}

std::string ToString(RankPermutation permutation) {
  switch (permutation) {
    case RankPermutation::kNone: return "none";
    case RankPermutation::kShared: return "shared";
    case RankPermutation::kPerUser: return "per_user";
  }
  return "unknown";
}

}  // namespace reccache
