#pragma once

#include <cstdint>
#include <random>

namespace longmed {

// splitmix64 finalizer; good avalanche, cheap, stable across platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d649bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent, reproducible stream for (base seed, task index).  Replication
// k always sees the same stream no matter how work is scheduled.
inline std::uint64_t derive_stream(std::uint64_t base_seed, std::uint64_t index) {
  return splitmix64(splitmix64(base_seed) ^
                    splitmix64(index * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL));
}

inline std::mt19937_64 make_rng(std::uint64_t base_seed, std::uint64_t index) {
  return std::mt19937_64(derive_stream(base_seed, index));
}

}  // namespace longmed
