#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "reccache/environment.h"
#include "reccache/policies.h"
#include "reccache/policy_ids.h"
#include "test_util.h"

using namespace reccache;
using reccache::testing::Ids;
using reccache::testing::MakeInstance;

namespace {

ObservedBatch Observation(std::size_t slot, std::vector<int> counts,
                          std::vector<ContentId> cache) {
  return ObservedBatch{slot, std::move(counts), std::move(cache)};
}

PolicyContext Context(const ProblemInstance& instance, double epsilon = 0.4) {
  PolicyContext ctx;
  ctx.catalog = instance.catalog;
  ctx.algo.epsilon = epsilon;
  ctx.acceptance = instance.acceptance;
  ctx.induced = instance.induced;
  return ctx;
}

// Closed loop of one policy against one environment.
std::vector<Decision> Drive(Policy& policy, const ProblemInstance& instance,
                            std::uint64_t seed, std::size_t slots) {
  Environment env(instance, seed);
  std::vector<Decision> decisions;
  for (std::size_t t = 1; t <= slots; ++t) {
    Decision d = policy.Decide(t);
    RequireValidDecision(d, instance.catalog, policy.recommends());
    const auto batch = env.Sample(d, t);
    policy.Ingest(Observe(batch, d.cache), d);
    decisions.push_back(std::move(d));
  }
  return decisions;
}

}  // namespace

TEST_CASE("ucb index at the first slot") {
  PolicyState state(1);
  const UcbParams params{5.0, 4.0, 20};
  const double expected = 20.0 * std::sqrt(2.375);
  CHECK(expected == doctest::Approx(30.8221).epsilon(1e-5));
  CHECK(UcbIndex(ContentId(1), state, 1, params, 0.95) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(UcbIndexUnknownW(ContentId(1), state, 1, params, 0.95) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("confidence radius") {
  const UcbParams params{5.0, 4.0, 3};
  SUBCASE("zero acceptance") {
    for (long n : {1L, 4L, 50L}) {
      for (std::size_t t : {2u, 10u, 1000u}) {
        CHECK(ConfidenceRadius(n, t, 0.0, params) ==
              doctest::Approx(3.0 * std::sqrt(2.0 * std::log(t) / n)));
      }
    }
  }
  SUBCASE("vanishes with many pulls") {
    CHECK(ConfidenceRadius(100000000, 100, 0.5, params) < 1e-3);
  }
  SUBCASE("monotone in pulls and slot") {
    for (double w : {0.0, 0.3, 0.95}) {
      for (long n = 1; n < 40; ++n) {
        CHECK(ConfidenceRadius(n + 1, 50, w, params) <
              ConfidenceRadius(n, 50, w, params));
      }
      for (std::size_t t = 1; t < 40; ++t) {
        CHECK(ConfidenceRadius(5, t + 1, w, params) >
              ConfidenceRadius(5, t, w, params));
      }
    }
  }
  SUBCASE("exploration term shrinks as acceptance grows") {
    const UcbParams no_prior{0.0, 4.0, 3};
    for (double w = 0.0; w < 0.95; w += 0.05) {
      CHECK(ConfidenceRadius(3, 100, w + 0.05, no_prior) <
            ConfidenceRadius(3, 100, w, no_prior));
    }
  }
  SUBCASE("invalid inputs") {
    CHECK_THROWS_AS(ConfidenceRadius(1, 1, 1.5, params), std::invalid_argument);
    CHECK_THROWS_AS(ConfidenceRadius(1, 0, 0.5, params), std::invalid_argument);
  }
  SUBCASE("comb ucb radius") {
    CHECK(CombUcbRadius(4, 20, 3) ==
          doctest::Approx(3.0 * std::sqrt(1.5 * std::log(20.0) / 4.0)));
    CHECK(CombUcbRadius(4, 1, 3) == 0.0);
  }
}

TEST_CASE("unknown-acceptance index") {
  PolicyState state(3);
  state.Update(Observation(1, {2, 0, 2}, Ids({1, 3})),
               Decision{Ids({1, 3}), {Ids({1})}});
  const UcbParams params{5.0, 4.0, 1};
  CHECK(UcbIndexUnknownW(ContentId(1), state, 7, params, 0.0) ==
        doctest::Approx(state.RawEstimate(ContentId(1)) +
                        std::sqrt(2.0 * std::log(7.0) / 2.0)));
  for (double w : {0.0, 0.4, 0.9}) {
    CHECK(UcbIndexUnknownW(ContentId(1), state, 7, params, w) ==
          UcbIndexUnknownW(ContentId(3), state, 7, params, w));
  }
}

TEST_CASE("cache selection") {
  CHECK(SelectCache(std::vector<double>{0.9, 0.5, 0.9, 0.1}, 2) == Ids({1, 3}));
  CHECK(SelectCache(std::vector<double>(5, 0.7), 3) == Ids({1, 2, 3}));
  CHECK(SelectCache(std::vector<double>{5, 4, 3, 2, 1}, 2) == Ids({1, 2}));
  CHECK(SelectCache(std::vector<double>{1, 4, 2, 5, 3}, 2) == Ids({2, 4}));
  CHECK(RankByIndex(std::vector<double>{0.1, 0.9, 0.9, 0.3}) ==
        Ids({2, 3, 4, 1}));
  CHECK_THROWS_AS(SelectCache(std::vector<double>{1, 2}, 3),
                  std::invalid_argument);
}

TEST_CASE("recommendation selection") {
  const std::vector<double> idx{0.9, 0.2, 0.9, 0.5};
  SUBCASE("ties by smallest id") {
    const auto lists = SelectRecommendations(Ids({1, 3}), idx, 2, 3, true);
    REQUIRE(lists.size() == 3);
    for (const auto& l : lists) CHECK(l == Ids({1, 3}));
  }
  SUBCASE("R equals C") {
    const auto lists = SelectRecommendations(Ids({2, 3, 4}), idx, 3, 1, true);
    CHECK(lists[0] == Ids({3, 4, 2}));
  }
  SUBCASE("R one") {
    const auto lists = SelectRecommendations(Ids({2, 4}), idx, 1, 2, true);
    CHECK(lists[0] == Ids({4}));
  }
  SUBCASE("first by id") {
    const auto lists = SelectRecommendations(Ids({2, 3, 4}), idx, 2, 1, true,
                                             RecommendationRule::kFirstById);
    CHECK(lists[0] == Ids({2, 3}));
  }
  SUBCASE("seeded random") {
    std::mt19937_64 a(3), b(3);
    const auto x = SelectRecommendations(Ids({1, 2, 3, 4}), idx, 2, 4, false,
                                         RecommendationRule::kSeededRandom, &a);
    const auto y = SelectRecommendations(Ids({1, 2, 3, 4}), idx, 2, 4, false,
                                         RecommendationRule::kSeededRandom, &b);
    CHECK(x == y);
    for (const auto& l : x) {
      CHECK(l.size() == 2);
      CHECK(l[0] != l[1]);
    }
    CHECK_THROWS_AS(SelectRecommendations(Ids({1, 2}), idx, 1, 1, true,
                                          RecommendationRule::kSeededRandom),
                    std::invalid_argument);
  }
  SUBCASE("R larger than cache") {
    CHECK_THROWS_AS(SelectRecommendations(Ids({1}), idx, 2, 1, true),
                    std::invalid_argument);
  }
}

TEST_CASE("state update") {
  PolicyState state(3);
  const Decision d{Ids({1, 2}), {Ids({1})}};
  state.Update(Observation(1, {1, 0, 0}, Ids({1, 2})), d);
  REQUIRE(state.pulls(ContentId(1)) == 2);
  REQUIRE(state.RawEstimate(ContentId(1)) == doctest::Approx(0.5));

  const long pulls3 = state.pulls(ContentId(3));
  const long sum3 = state.reward_sum(ContentId(3));
  state.Update(Observation(2, {3, 0, 0}, Ids({1, 2})), d);
  CHECK(state.pulls(ContentId(1)) == 3);
  CHECK(state.RawEstimate(ContentId(1)) == doctest::Approx(4.0 / 3.0));
  CHECK(state.pulls(ContentId(3)) == pulls3);
  CHECK(state.reward_sum(ContentId(3)) == sum3);
  CHECK(state.rec_slots(ContentId(3)) == 0);
  CHECK(state.nonrec_slots(ContentId(3)) == 0);
  CHECK(state.rec_slots(ContentId(1)) == 2);
  CHECK(state.nonrec_slots(ContentId(2)) == 2);
  for (std::size_t i = 1; i <= 3; ++i) {
    const ContentId id(i);
    CHECK(state.rec_slots(id) + state.nonrec_slots(id) + 1 == state.pulls(id));
  }

  CHECK_THROWS_AS(state.Update(Observation(3, {0, 0, 1}, Ids({1, 2})), d),
                  std::invalid_argument);
  CHECK_THROWS_AS(state.Update(Observation(3, {0, 0, 0}, Ids({1, 3})), d),
                  std::invalid_argument);
}

TEST_CASE("recommendation-corrected estimate") {
  const AcceptanceProfile w({0.4, 0.4});
  PolicyState state(
      3, CorrectionWeights(w, InducedDistributionSpec::Uniform(), 2));
  const Decision d{Ids({1, 2}), {Ids({1, 2}), Ids({2, 1})}};
  state.Update(Observation(1, {1, 0, 0}, Ids({1, 2})), d);
  CHECK(state.CorrectedEstimate(ContentId(1)) == doctest::Approx(0.30));
  CHECK(state.CorrectedEstimate(ContentId(1), 2 * 0.4 / 2) ==
        doctest::Approx(0.30));
}

TEST_CASE("positional correction weights") {
  const AcceptanceProfile w({0.5});
  const auto uniform = CorrectionWeights(w, InducedDistributionSpec::Uniform(), 4);
  for (double x : uniform[0]) CHECK(x == doctest::Approx(0.125));
  const auto zipf = CorrectionWeights(w, InducedDistributionSpec::Zipf({1.0}), 3);
  CHECK(zipf[0][0] == doctest::Approx(0.5 * 6.0 / 11.0));
  CHECK(zipf[0][2] == doctest::Approx(0.5 * 2.0 / 11.0));
}

TEST_CASE("incremental estimates equal batch recomputation") {
  const auto inst = MakeInstance(
      {{0.1, 0.2, 0.3, 0.2, 0.2}, {0.3, 0.1, 0.1, 0.2, 0.3}}, {0.6, 0.3}, 3, 2);
  auto ctx = Context(inst);
  ctx.algo.estimator = EstimatorVariant::kRecommendationCorrected;
  auto policy = MakePolicy(kUcbRec, ctx, 4);
  Environment env(inst, 9);
  std::vector<Decision> decisions;
  std::vector<ObservedBatch> observed;
  for (std::size_t t = 1; t <= 300; ++t) {
    Decision d = policy->Decide(t);
    auto obs = Observe(env.Sample(d, t), d.cache);
    policy->Ingest(obs, d);
    decisions.push_back(d);
    observed.push_back(obs);
  }
  for (std::size_t i = 1; i <= 5; ++i) {
    const ContentId id(i);
    long n = 1, s = 0;
    double correction = 0.0;
    for (std::size_t t = 0; t < decisions.size(); ++t) {
      if (!decisions[t].caches(id)) continue;
      ++n;
      s += observed[t][id];
      for (std::size_t u = 0; u < 2; ++u) {
        for (ContentId r : decisions[t].recs[u]) {
          if (r == id) correction += inst.acceptance[u] / 2.0;
        }
      }
    }
    CHECK(policy->state().pulls(id) == n);
    CHECK(policy->state().reward_sum(id) == s);
    CHECK(policy->state().CorrectedEstimate(id) ==
          doctest::Approx((s - correction) / n).epsilon(1e-12));
  }
}

TEST_CASE("acceptance estimate") {
  SUBCASE("warm start") {
    PolicyState state(4);
    CHECK_FALSE(HasWbarEvidence(state));
    CHECK(EstimateWbar(state, 2, 1) == 0.0);
    CHECK(CurrentWbar(state, 2, 1) == kWbarPrior);
  }

  auto run = [](std::vector<double> w) {
    const std::size_t n = 6;
    std::vector<std::vector<double>> rows(w.size(),
                                          std::vector<double>(n, 1.0 / n));
    const auto inst = MakeInstance(rows, std::move(w), 3, 1);
    auto policy = MakePolicy(kRandomCache, Context(inst), 21);
    Drive(*policy, inst, 22, 100000);
    REQUIRE(policy->WbarEstimate().has_value());
    return *policy->WbarEstimate();
  };
  SUBCASE("converges to the mean acceptance") {
    CHECK(std::abs(run({0.2, 0.4}) - 0.3) < 0.02);
  }
  SUBCASE("no acceptance") { CHECK(run({0.0, 0.0}) < 0.02); }
}

TEST_CASE("index policies start from the smallest ids") {
  const auto inst = MakeInstance({{0.1, 0.1, 0.2, 0.2, 0.4}}, {0.5}, 3, 1);
  for (auto id : {kUcbRec, kUcbUnknownW, kCombUcb, kGreedy}) {
    auto policy = MakePolicy(id, Context(inst), 1);
    CHECK(policy->id() == id);
    CHECK(policy->Decide(1).cache == Ids({1, 2, 3}));
  }
}

TEST_CASE("single content is always cached") {
  const auto inst = MakeInstance({{1.0}}, {0.5}, 1, 1);
  for (auto id : kAllPolicies) {
    auto policy = MakePolicy(id, Context(inst), 1);
    for (const auto& d : Drive(*policy, inst, 2, 50)) {
      CHECK(d.cache == Ids({1}));
    }
  }
}

TEST_CASE("greedy follows the observed rewards") {
  const auto inst =
      MakeInstance({{0.1, 0.1, 0.1, 0.1, 0.5, 0.1}}, {0.0}, 5, 1);
  auto policy = MakePolicy(kGreedy, Context(inst), 1);
  Decision d = policy->Decide(1);
  REQUIRE(d.cache == Ids({1, 2, 3, 4, 5}));
  policy->Ingest(Observation(1, {0, 0, 0, 0, 1, 0}, d.cache), d);
  d = policy->Decide(2);
  CHECK(d.caches(ContentId(5)));
  CHECK(d.recs[0] == Ids({5}));
}

TEST_CASE("epsilon greedy") {
  const auto inst = MakeInstance({{0.3, 0.2, 0.1, 0.1, 0.1, 0.05, 0.05, 0.05,
                                   0.025, 0.025}},
                                 {0.5}, 3, 1);
  SUBCASE("epsilon zero matches greedy") {
    auto eps = MakePolicy(kEpsGreedy, Context(inst, 0.0), 8);
    auto greedy = MakePolicy(kGreedy, Context(inst, 0.0), 9);
    const auto a = Drive(*eps, inst, 17, 500);
    const auto b = Drive(*greedy, inst, 17, 500);
    for (std::size_t t = 0; t < a.size(); ++t) {
      CHECK(a[t].cache == b[t].cache);
      CHECK(a[t].recs == b[t].recs);
    }
  }
  SUBCASE("epsilon one caches uniform subsets") {
    auto eps = MakePolicy(kEpsGreedy, Context(inst, 1.0), 8);
    const std::size_t slots = 10000;
    const auto decisions = Drive(*eps, inst, 17, slots);
    std::vector<double> freq(10, 0.0);
    for (const auto& d : decisions) {
      for (ContentId id : d.cache) freq[id.index()] += 1.0 / slots;
    }
    const double p = 0.3;
    const double sigma = std::sqrt(p * (1 - p) / slots);
    for (double f : freq) CHECK(std::abs(f - p) < 3.0 * sigma);
  }
  SUBCASE("reproducible") {
    auto a = MakePolicy(kEpsGreedy, Context(inst), 8);
    auto b = MakePolicy(kEpsGreedy, Context(inst), 8);
    const auto x = Drive(*a, inst, 5, 300);
    const auto y = Drive(*b, inst, 5, 300);
    for (std::size_t t = 0; t < x.size(); ++t) CHECK(x[t].cache == y[t].cache);
  }
}

TEST_CASE("baselines without recommendations") {
  const auto inst = MakeInstance({{0.4, 0.3, 0.2, 0.1}}, {0.9}, 2, 1);
  auto ctx = Context(inst);
  ctx.algo.baseline_recommends = false;
  for (auto id : {kCombUcb, kGreedy, kEpsGreedy}) {
    auto policy = MakePolicy(id, ctx, 3);
    CHECK_FALSE(policy->recommends());
    for (const auto& d : Drive(*policy, inst, 4, 20)) {
      REQUIRE(d.recs.size() == 1);
      CHECK(d.recs[0].empty());
    }
  }
  auto ucb = MakePolicy(kUcbRec, ctx, 3);
  CHECK(ucb->recommends());
}

TEST_CASE("unknown policy id") {
  const auto inst = MakeInstance({{0.5, 0.5}}, {0.5}, 1, 1);
  CHECK_THROWS_AS(MakePolicy("thompson", Context(inst), 1),
                  std::invalid_argument);
}
