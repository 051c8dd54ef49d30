#include "reccache/policies.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "reccache/policy_ids.h"
#include "reccache/seeding.h"

namespace reccache {

PolicyState::PolicyState(std::size_t num_contents,
                         std::vector<std::vector<double>> correction_weights)
    : correction_weights_(std::move(correction_weights)),
      pulls_(num_contents, 1),
      reward_sum_(num_contents, 0),
      correction_(num_contents, 0.0),
      rec_slots_(num_contents, 0),
      rec_reward_(num_contents, 0),
      nonrec_slots_(num_contents, 0),
      nonrec_reward_(num_contents, 0),
      recommended_scratch_(num_contents, 0) {}

double PolicyState::RawEstimate(ContentId i) const {
  return static_cast<double>(reward_sum_[i.index()]) /
         static_cast<double>(pulls_[i.index()]);
}

double PolicyState::CorrectedEstimate(ContentId i) const {
  return (static_cast<double>(reward_sum_[i.index()]) - correction_[i.index()]) /
         static_cast<double>(pulls_[i.index()]);
}

double PolicyState::CorrectedEstimate(ContentId i,
                                      double boost_per_rec_slot) const {
  const double removed =
      static_cast<double>(rec_slots_[i.index()]) * boost_per_rec_slot;
  return (static_cast<double>(reward_sum_[i.index()]) - removed) /
         static_cast<double>(pulls_[i.index()]);
}

void PolicyState::Update(const ObservedBatch& observed,
                         const Decision& decision) {
  const std::size_t n = pulls_.size();
  if (observed.counts.size() != n) {
    throw std::invalid_argument("observation has wrong catalog size");
  }
  if (observed.cache != decision.cache) {
    throw std::invalid_argument("observation was masked against another cache");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (observed.counts[i] != 0 && !decision.caches(ContentId::FromIndex(i))) {
      throw std::invalid_argument("observed requests for a non-cached content");
    }
  }
  if (tracks_correction() && correction_weights_.size() != decision.recs.size()) {
    throw std::invalid_argument("correction weights do not match user count");
  }

  std::fill(recommended_scratch_.begin(), recommended_scratch_.end(), 0);
  for (std::size_t u = 0; u < decision.recs.size(); ++u) {
    const auto& list = decision.recs[u];
    if (tracks_correction() && !list.empty() &&
        correction_weights_[u].size() != list.size()) {
      throw std::invalid_argument("correction weights do not match list length");
    }
    for (std::size_t k = 0; k < list.size(); ++k) {
      recommended_scratch_[list[k].index()] = 1;
      if (tracks_correction()) {
        correction_[list[k].index()] += correction_weights_[u][k];
      }
    }
  }
  for (ContentId id : decision.cache) {
    const std::size_t i = id.index();
    const int z = observed.counts[i];
    pulls_[i] += 1;
    reward_sum_[i] += z;
    if (recommended_scratch_[i]) {
      rec_slots_[i] += 1;
      rec_reward_[i] += z;
    } else {
      nonrec_slots_[i] += 1;
      nonrec_reward_[i] += z;
    }
  }
}

double ConfidenceRadius(long pulls, std::size_t t, double wbar,
                        const UcbParams& params) {
  if (!(wbar >= 0.0 && wbar <= 1.0)) {
    throw std::invalid_argument("mean acceptance outside [0,1]");
  }
  if (t < 1) throw std::invalid_argument("slot index must be at least 1");
  const double n = static_cast<double>(pulls);
  const double log_t = std::log(static_cast<double>(t));
  const double explore =
      2.0 * std::pow(1.0 - wbar, 1.0 / params.eta) * log_t / n;
  const double prior = params.alpha * wbar / (2.0 * n);
  return static_cast<double>(params.num_users) * std::sqrt(explore + prior);
}

double CombUcbRadius(long pulls, std::size_t t, std::size_t num_users) {
  if (t < 1) throw std::invalid_argument("slot index must be at least 1");
  return static_cast<double>(num_users) *
         std::sqrt(1.5 * std::log(static_cast<double>(t)) /
                   static_cast<double>(pulls));
}

double UcbIndex(ContentId i, const PolicyState& state, std::size_t t,
                const UcbParams& params, double wbar,
                EstimatorVariant estimator) {
  const double estimate = estimator == EstimatorVariant::kRaw
                              ? state.RawEstimate(i)
                              : state.CorrectedEstimate(i);
  return estimate + ConfidenceRadius(state.pulls(i), t, wbar, params);
}

double UcbIndexUnknownW(ContentId i, const PolicyState& state, std::size_t t,
                        const UcbParams& params, double wbar_estimate,
                        EstimatorVariant estimator,
                        std::size_t recs_per_user) {
  double estimate = state.RawEstimate(i);
  if (estimator == EstimatorVariant::kRecommendationCorrected) {
    const double boost = static_cast<double>(params.num_users) * wbar_estimate /
                         static_cast<double>(recs_per_user);
    estimate = state.CorrectedEstimate(i, boost);
  }
  return estimate + ConfidenceRadius(state.pulls(i), t, wbar_estimate, params);
}

std::vector<ContentId> RankByIndex(std::span<const double> indices) {
  std::vector<ContentId> order(indices.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = ContentId::FromIndex(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](ContentId a, ContentId b) {
    return indices[a.index()] > indices[b.index()];
  });
  return order;
}

std::vector<ContentId> SelectCache(std::span<const double> indices,
                                   std::size_t capacity) {
  if (capacity > indices.size()) {
    throw std::invalid_argument("cache capacity exceeds catalog size");
  }
  auto order = RankByIndex(indices);
  order.resize(capacity);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<std::vector<ContentId>> SelectRecommendations(
    std::span<const ContentId> cache, std::span<const double> indices,
    std::size_t recs_per_user, std::size_t num_users, bool shared,
    RecommendationRule rule, std::mt19937_64* rng) {
  if (recs_per_user > cache.size()) {
    throw std::invalid_argument("cannot recommend more contents than cached");
  }
  auto draw_random = [&]() {
    if (rng == nullptr) {
      throw std::invalid_argument("seeded-random recommendations need a generator");
    }
    std::vector<ContentId> pool(cache.begin(), cache.end());
    // Partial Fisher-Yates: the first R slots become a uniform ordered sample.
    for (std::size_t k = 0; k < recs_per_user; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, pool.size() - 1);
      std::swap(pool[k], pool[pick(*rng)]);
    }
    pool.resize(recs_per_user);
    return pool;
  };

  std::vector<ContentId> list;
  switch (rule) {
    case RecommendationRule::kTopIndex: {
      list.assign(cache.begin(), cache.end());
      std::stable_sort(list.begin(), list.end(), [&](ContentId a, ContentId b) {
        return indices[a.index()] > indices[b.index()];
      });
      list.resize(recs_per_user);
      break;
    }
    case RecommendationRule::kFirstById:
      list.assign(cache.begin(), cache.end());
      std::sort(list.begin(), list.end());
      list.resize(recs_per_user);
      break;
    case RecommendationRule::kSeededRandom:
      if (!shared) {
        std::vector<std::vector<ContentId>> lists(num_users);
        for (auto& l : lists) l = draw_random();
        return lists;
      }
      list = draw_random();
      break;
  }
  return std::vector<std::vector<ContentId>>(num_users, list);
}

double EstimateWbar(const PolicyState& state, std::size_t num_users,
                    std::size_t recs_per_user) {
  const std::size_t n = state.num_contents();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto id = ContentId::FromIndex(i);
    if (state.rec_slots(id) == 0 || state.nonrec_slots(id) == 0) continue;
    const double recommended_mean = static_cast<double>(state.rec_reward(id)) /
                                    static_cast<double>(state.rec_slots(id));
    const double plain_mean = static_cast<double>(state.nonrec_reward(id)) /
                              static_cast<double>(state.nonrec_slots(id));
    total += recommended_mean - plain_mean;
  }
  const double estimate = static_cast<double>(recs_per_user) /
                          (static_cast<double>(num_users) * static_cast<double>(n)) *
                          total;
  return std::clamp(estimate, 0.0, 1.0);
}

bool HasWbarEvidence(const PolicyState& state) {
  for (std::size_t i = 0; i < state.num_contents(); ++i) {
    const auto id = ContentId::FromIndex(i);
    if (state.rec_slots(id) > 0 && state.nonrec_slots(id) > 0) return true;
  }
  return false;
}

double CurrentWbar(const PolicyState& state, std::size_t num_users,
                   std::size_t recs_per_user) {
  return HasWbarEvidence(state)
             ? EstimateWbar(state, num_users, recs_per_user)
             : kWbarPrior;
}

void Policy::Ingest(const ObservedBatch& observed, const Decision& decision) {
  state_.Update(observed, decision);
}

std::vector<std::vector<double>> CorrectionWeights(
    const AcceptanceProfile& acceptance, const InducedDistributionSpec& induced,
    std::size_t recs_per_user) {
  std::vector<std::vector<double>> weights(acceptance.num_users(),
                                           std::vector<double>(recs_per_user));
  for (std::size_t u = 0; u < weights.size(); ++u) {
    for (std::size_t k = 0; k < recs_per_user; ++k) {
      weights[u][k] = acceptance[u] *
                      InducedPositionWeight(induced, u, k + 1, recs_per_user);
    }
  }
  return weights;
}

namespace {

std::vector<std::vector<double>> CorrectionWeights(
    const PolicyContext& context) {
  if (context.algo.estimator != EstimatorVariant::kRecommendationCorrected) {
    return {};
  }
  return CorrectionWeights(context.acceptance, context.induced,
                           context.catalog.recs_per_user);
}

// Shared machinery for policies that rank contents by a per-content score.
class IndexPolicy : public Policy {
 public:
  IndexPolicy(std::string_view id, const PolicyContext& context,
              std::uint64_t seed, bool recommends,
              bool knows_acceptance = true)
      : Policy(PolicyState(context.catalog.num_contents,
                           knows_acceptance
                               ? CorrectionWeights(context)
                               : std::vector<std::vector<double>>{})),
        id_(id),
        context_(context),
        recommends_(recommends),
        rng_(seed),
        indices_(context.catalog.num_contents) {}

  std::string_view id() const override { return id_; }
  bool recommends() const override { return recommends_; }

 protected:
  double Estimate(ContentId i) const {
    return context_.algo.estimator == EstimatorVariant::kRaw
               ? state_.RawEstimate(i)
               : state_.CorrectedEstimate(i);
  }

  Decision DecideFromIndices(std::vector<ContentId> cache) {
    const auto& cat = context_.catalog;
    Decision decision;
    decision.cache = std::move(cache);
    if (recommends_) {
      decision.recs = SelectRecommendations(
          decision.cache, indices_, cat.recs_per_user, cat.num_users,
          context_.algo.shared_recs, context_.algo.rec_rule, &rng_);
    } else {
      decision.recs.assign(cat.num_users, {});
    }
    return decision;
  }

  Decision DecideTopC() {
    return DecideFromIndices(
        SelectCache(indices_, context_.catalog.cache_capacity));
  }

  UcbParams ucb_params() const {
    return {context_.algo.alpha, context_.algo.eta, context_.catalog.num_users};
  }

  std::string_view id_;
  PolicyContext context_;
  bool recommends_;
  std::mt19937_64 rng_;
  std::vector<double> indices_;
};

class UcbRecPolicy final : public IndexPolicy {
 public:
  UcbRecPolicy(const PolicyContext& context, std::uint64_t seed)
      : IndexPolicy(kUcbRec, context, seed, true) {}

  Decision Decide(std::size_t t) override {
    const double wbar = context_.acceptance.mean();
    const auto params = ucb_params();
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      indices_[i] = UcbIndex(ContentId::FromIndex(i), state_, t, params, wbar,
                             context_.algo.estimator);
    }
    return DecideTopC();
  }
};

class UcbUnknownWPolicy final : public IndexPolicy {
 public:
  UcbUnknownWPolicy(const PolicyContext& context, std::uint64_t seed)
      : IndexPolicy(kUcbUnknownW, context, seed, true,
                    /*knows_acceptance=*/false) {}

  Decision Decide(std::size_t t) override {
    const auto& cat = context_.catalog;
    const double wbar = CurrentWbar(state_, cat.num_users, cat.recs_per_user);
    const auto params = ucb_params();
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      indices_[i] =
          UcbIndexUnknownW(ContentId::FromIndex(i), state_, t, params, wbar,
                           context_.algo.estimator, cat.recs_per_user);
    }
    return DecideTopC();
  }

  std::optional<double> WbarEstimate() const override {
    return CurrentWbar(state_, context_.catalog.num_users,
                       context_.catalog.recs_per_user);
  }
};

class CombUcbPolicy final : public IndexPolicy {
 public:
  CombUcbPolicy(const PolicyContext& context, std::uint64_t seed)
      : IndexPolicy(kCombUcb, context, seed, context.algo.baseline_recommends) {}

  Decision Decide(std::size_t t) override {
    const std::size_t users = context_.catalog.num_users;
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      const auto id = ContentId::FromIndex(i);
      indices_[i] = Estimate(id) + CombUcbRadius(state_.pulls(id), t, users);
    }
    return DecideTopC();
  }
};

class GreedyPolicy : public IndexPolicy {
 public:
  GreedyPolicy(std::string_view id, const PolicyContext& context,
               std::uint64_t seed, bool knows_acceptance = true)
      : IndexPolicy(id, context, seed, context.algo.baseline_recommends,
                    knows_acceptance) {}

  Decision Decide(std::size_t /*t*/) override {
    FillEstimates();
    return DecideTopC();
  }

 protected:
  void FillEstimates() {
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      indices_[i] = Estimate(ContentId::FromIndex(i));
    }
  }

  std::vector<ContentId> RandomCache() {
    const std::size_t n = context_.catalog.num_contents;
    std::vector<ContentId> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = ContentId::FromIndex(i);
    for (std::size_t k = 0; k < context_.catalog.cache_capacity; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, n - 1);
      std::swap(pool[k], pool[pick(rng_)]);
    }
    pool.resize(context_.catalog.cache_capacity);
    std::sort(pool.begin(), pool.end());
    return pool;
  }
};

class EpsGreedyPolicy final : public GreedyPolicy {
 public:
  EpsGreedyPolicy(const PolicyContext& context, std::uint64_t seed)
      : GreedyPolicy(kEpsGreedy, context, seed) {}

  Decision Decide(std::size_t /*t*/) override {
    FillEstimates();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng_) >= context_.algo.epsilon) return DecideTopC();
    return DecideFromIndices(RandomCache());
  }
};

class RandomCachePolicy final : public GreedyPolicy {
 public:
  RandomCachePolicy(const PolicyContext& context, std::uint64_t seed)
      : GreedyPolicy(kRandomCache, context, seed, /*knows_acceptance=*/false) {}

  Decision Decide(std::size_t /*t*/) override {
    const auto& cat = context_.catalog;
    Decision decision;
    decision.cache = RandomCache();
    decision.recs =
        SelectRecommendations(decision.cache, indices_, cat.recs_per_user,
                              cat.num_users, /*shared=*/true,
                              RecommendationRule::kSeededRandom, &rng_);
    return decision;
  }

  bool recommends() const override { return true; }

  std::optional<double> WbarEstimate() const override {
    return CurrentWbar(state_, context_.catalog.num_users,
                       context_.catalog.recs_per_user);
  }
};

}  // namespace

std::unique_ptr<Policy> MakePolicy(std::string_view id,
                                   const PolicyContext& context,
                                   std::uint64_t seed) {
  if (context.acceptance.num_users() != context.catalog.num_users) {
    throw std::invalid_argument("acceptance profile does not match U");
  }
  if (RequiresSharedRecommendations(id) && !context.algo.shared_recs) {
    throw std::invalid_argument("policy '" + std::string(id) +
                                "' requires shared recommendations");
  }
  // Keep policy randomness apart from the environment streams on the same seed.
  const std::uint64_t policy_seed = CombineSeed(seed, StableHash("policy"));
  if (id == kUcbRec) return std::make_unique<UcbRecPolicy>(context, policy_seed);
  if (id == kUcbUnknownW) {
    return std::make_unique<UcbUnknownWPolicy>(context, policy_seed);
  }
  if (id == kCombUcb) return std::make_unique<CombUcbPolicy>(context, policy_seed);
  if (id == kGreedy) {
    return std::make_unique<GreedyPolicy>(kGreedy, context, policy_seed);
  }
  if (id == kEpsGreedy) {
    return std::make_unique<EpsGreedyPolicy>(context, policy_seed);
  }
  if (id == kRandomCache) {
    return std::make_unique<RandomCachePolicy>(context, policy_seed);
  }
  throw std::invalid_argument("unknown policy '" + std::string(id) + "'");
}

}  // namespace reccache
