#ifndef RECCACHE_SEEDING_H_
#define RECCACHE_SEEDING_H_

#include <cstdint>
#include <string_view>

namespace reccache {

// splitmix64 finalizer.
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a, stable across platforms and runs.
constexpr std::uint64_t StableHash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t CombineSeed(std::uint64_t seed, std::uint64_t value) {
  return Mix64(seed ^ Mix64(value));
}

/// Seed for the problem instance of one run; shared by every policy so that
/// all policies in run r face the same preferences and acceptances.
constexpr std::uint64_t InstanceSeed(std::uint64_t master, std::uint64_t run) {
  return CombineSeed(CombineSeed(master, 0x1a57a9ceULL), run);
}

/// Seed for the environment and policy streams of one (policy, run) pair.
constexpr std::uint64_t PolicyRunSeed(std::uint64_t master,
                                      std::string_view policy,
                                      std::uint64_t run) {
  return CombineSeed(CombineSeed(master, StableHash(policy)), run);
}

}  // namespace reccache

#endif  // RECCACHE_SEEDING_H_
