#ifndef REPLAY_RNG_H_
#define REPLAY_RNG_H_

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace replay {

// Uniform integer in [0, n) by rejection, identical on every platform
// (std::uniform_int_distribution is implementation-defined).
inline std::uint64_t UniformBelow(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Fisher-Yates, for the same portability reason as above.
template <typename T>
void Shuffle(std::span<T> items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[UniformBelow(rng, i)]);
  }
}

}  // namespace replay

#endif  // REPLAY_RNG_H_
