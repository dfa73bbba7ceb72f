#pragma once

#include <cstdint>
#include <random>

namespace eqloop {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of replica `index` of a study seeded with `base`. Depends only on
/// (base, stream, index), so results do not depend on scheduling.
std::uint64_t replica_seed(std::uint64_t base, std::uint64_t index, std::uint64_t stream = 0);

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace eqloop
