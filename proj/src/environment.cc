#include "reccache/environment.h"

#include <numeric>
#include <ostream>
#include <stdexcept>

#include "reccache/seeding.h"

namespace reccache {
namespace {

// Inverse-CDF draw; falls back to the last positive entry when rounding
// leaves the cumulative sum just below u.
std::size_t DrawIndex(const std::vector<double>& dist, double u) {
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] <= 0.0) continue;
    acc += dist[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

}  // namespace

long RequestBatch::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0L);
}

long ObservedBatch::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0L);
}

RequestBatch SampleRequests(const Decision& decision,
                            const ProblemInstance& instance,
                            std::span<std::mt19937_64> user_rngs,
                            std::size_t slot) {
  const auto& cat = instance.catalog;
  if (user_rngs.size() != cat.num_users) {
    throw std::invalid_argument("need one generator per user");
  }
  RequestBatch batch{slot, std::vector<int>(cat.num_contents, 0)};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t u = 0; u < cat.num_users; ++u) {
    const auto dist = RequestDistribution(u, decision, instance);
    batch.counts[DrawIndex(dist, unit(user_rngs[u]))] +=
        kRequestsPerUserPerSlot;
  }
  return batch;
}

ObservedBatch Observe(const RequestBatch& batch,
                      std::span<const ContentId> cache) {
  ObservedBatch observed{batch.slot, std::vector<int>(batch.counts.size(), 0),
                         {cache.begin(), cache.end()}};
  for (ContentId id : cache) {
    observed.counts[id.index()] = batch.counts[id.index()];
  }
  return observed;
}

std::vector<double> ExactRequestVector(const Decision& decision,
                                       const ProblemInstance& instance) {
  const auto& cat = instance.catalog;
  std::vector<double> rates(cat.num_contents, 0.0);
  for (std::size_t u = 0; u < cat.num_users; ++u) {
    const auto dist = RequestDistribution(u, decision, instance);
    for (std::size_t i = 0; i < dist.size(); ++i) rates[i] += dist[i];
  }
  return rates;
}

void WriteTrace(std::ostream& out, const RequestBatch& batch) {
  for (std::size_t i = 0; i < batch.counts.size(); ++i) {
    if (batch.counts[i] != 0) {
      out << batch.slot << ',' << ContentId::FromIndex(i).value() << ','
          << batch.counts[i] << '\n';
    }
  }
}

Environment::Environment(const ProblemInstance& instance, std::uint64_t seed)
    : instance_(&instance) {
  user_rngs_.reserve(instance.catalog.num_users);
  for (std::size_t u = 0; u < instance.catalog.num_users; ++u) {
    user_rngs_.emplace_back(CombineSeed(seed, u));
  }
}

RequestBatch Environment::Sample(const Decision& decision, std::size_t slot) {
  return SampleRequests(decision, *instance_, user_rngs_, slot);
}

}  // namespace reccache
