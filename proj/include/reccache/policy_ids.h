#ifndef RECCACHE_POLICY_IDS_H_
#define RECCACHE_POLICY_IDS_H_

#include <array>
#include <string_view>

namespace reccache {

// Stable identifiers used in configs and CSV output.
inline constexpr std::string_view kUcbRec = "ucb_rec";
inline constexpr std::string_view kUcbUnknownW = "ucb_unknown_w";
inline constexpr std::string_view kCombUcb = "comb_ucb";
inline constexpr std::string_view kGreedy = "greedy";
inline constexpr std::string_view kEpsGreedy = "eps_greedy";
// Uniformly random cache with shared recommendations; used to exercise the
// acceptance estimator under a policy that visits every content.
inline constexpr std::string_view kRandomCache = "random_cache";

inline constexpr std::array<std::string_view, 6> kAllPolicies = {
    kUcbRec, kUcbUnknownW, kCombUcb, kGreedy, kEpsGreedy, kRandomCache};

constexpr bool IsKnownPolicy(std::string_view id) {
  for (auto known : kAllPolicies) {
    if (known == id) return true;
  }
  return false;
}

/// Policies that estimate mean acceptance need the same list for all users.
constexpr bool RequiresSharedRecommendations(std::string_view id) {
  return id == kUcbUnknownW || id == kRandomCache;
}

}  // namespace reccache

#endif  // RECCACHE_POLICY_IDS_H_
