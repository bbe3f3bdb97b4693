#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace umw {

/// Generator used throughout the library. Streams are derived with
/// derive_seed so that replicate b of cell c always sees the same draws,
/// independent of scheduling.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Folds a base seed and a path of indices into a stream seed.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> path) noexcept;

Rng make_rng(std::uint64_t base, std::initializer_list<std::uint64_t> path = {});

/// Uniform draw on the open interval (0,1) using the top 53 bits.
double uniform_open(Rng& rng) noexcept;

}  // namespace umw
