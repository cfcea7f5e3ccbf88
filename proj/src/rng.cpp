#include "lesioneval/rng.hpp"

#include "lesioneval/errors.hpp"

namespace lesioneval {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  if (n == 0) throw ContractError("uniform_below: n must be positive");
  // Largest multiple of n that fits in 64 bits; rejection keeps it unbiased.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t draw;
  do {
    draw = rng();
  } while (draw >= limit);
  return draw % n;
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  if (lo > hi) throw ContractError("uniform_int: empty range");
  const std::uint64_t span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) -
                                                        static_cast<std::int64_t>(lo)) + 1;
  return lo + static_cast<int>(uniform_below(rng, span));
}

bool uniform_bit(std::mt19937_64& rng) { return (rng() & 1u) != 0; }

}  // namespace lesioneval
