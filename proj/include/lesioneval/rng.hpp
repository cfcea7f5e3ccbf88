#ifndef LESIONEVAL_RNG_HPP
#define LESIONEVAL_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace lesioneval {

// std::mt19937_64 output is fully specified by the standard, so every
// stream here is bit-reproducible across platforms. Distribution helpers
// are hand-rolled because std::uniform_int_distribution is not.

std::uint64_t splitmix64(std::uint64_t& state);

std::uint64_t fnv1a64(std::string_view bytes);

/// Unbiased integer in [0, n) via rejection sampling. n must be > 0.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n);

/// Unbiased integer in [lo, hi], inclusive.
int uniform_int(std::mt19937_64& rng, int lo, int hi);

/// One fair bit.
bool uniform_bit(std::mt19937_64& rng);

}  // namespace lesioneval

#endif
