#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace gnpass::rng {

// splitmix64 step; used to stretch a user seed into independent stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic sub-seed for stream `index` of a run seeded with `seed`.
// Batches, checkpoints and optimizer noise each get their own stream so the
// schedule does not depend on evaluation order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t s = seed;
  splitmix64(s);
  s ^= 0x94d049bb133111ebULL * (index + 1);
  splitmix64(s);
  return splitmix64(s);
}

// Unbiased draw from [0, n). mt19937_64 output is bit-exact across platforms;
// std::uniform_int_distribution is not, so the rejection loop lives here.
inline std::uint64_t bounded(std::mt19937_64& gen, std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v = gen();
  while (v >= limit) v = gen();
  return v % n;
}

// [0, 1) with 53 random bits.
inline double unit_real(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Fisher-Yates with the portable bounded() draw; std::shuffle is
// implementation-defined and would break byte-identical splits.
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& gen) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded(gen, i));
    using std::swap;
    swap(v[i - 1], v[j]);
  }
}

}  // namespace gnpass::rng
