#pragma once

#include <cstdint>
#include <random>

namespace hillnet {

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

using Rng = std::mt19937_64;

/// Generator for substream `index` of `seed`. Distinct (seed, index) pairs
/// give statistically independent streams; the mapping is fixed so results
/// do not depend on how work is split across threads.
Rng substream(std::uint64_t seed, std::uint64_t index);

/// Child seed for a named purpose (restart r, parameter i, ...).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace hillnet
