#ifndef RECCACHE_ENVIRONMENT_H_
#define RECCACHE_ENVIRONMENT_H_

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <vector>

#include "reccache/model.h"

namespace reccache {

/// Every user issues exactly one request per slot.
inline constexpr int kRequestsPerUserPerSlot = 1;

/// Per-content request counts Z_i(t) for one slot, indexed by content index.
struct RequestBatch {
  std::size_t slot = 0;
  std::vector<int> counts;

  int operator[](ContentId id) const { return counts[id.index()]; }
  long total() const;
};

/// Request counts as seen by the base station: zero outside the cache.
struct ObservedBatch {
  std::size_t slot = 0;
  std::vector<int> counts;
  std::vector<ContentId> cache;

  int operator[](ContentId id) const { return counts[id.index()]; }
  long total() const;
};

/// Draws one request per user from its request distribution. Each user has
/// its own generator so draws of one user never depend on another's.
RequestBatch SampleRequests(const Decision& decision,
                            const ProblemInstance& instance,
                            std::span<std::mt19937_64> user_rngs,
                            std::size_t slot);

ObservedBatch Observe(const RequestBatch& batch,
                      std::span<const ContentId> cache);

/// p_i = sum_u p_u^req(i), indexed by content index. Sums to U.
std::vector<double> ExactRequestVector(const Decision& decision,
                                       const ProblemInstance& instance);

/// Writes `t,content_id,count` rows for the non-zero counts of a batch.
void WriteTrace(std::ostream& out, const RequestBatch& batch);

/// Closed-loop request generator for one (policy, run) pair.
class Environment {
 public:
  /// `instance` must outlive the environment.
  Environment(const ProblemInstance& instance, std::uint64_t seed);

  RequestBatch Sample(const Decision& decision, std::size_t slot);

  const ProblemInstance& instance() const { return *instance_; }

 private:
  const ProblemInstance* instance_;
  std::vector<std::mt19937_64> user_rngs_;
};

}  // namespace reccache

#endif  // RECCACHE_ENVIRONMENT_H_
