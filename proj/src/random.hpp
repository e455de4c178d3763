#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace fmad::detail {

// Fisher-Yates driven directly by mt19937_64 so the permutation does not
// depend on the standard library's distribution implementations.
template <typename T>
void seeded_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

// Uniform double in [0, 1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace fmad::detail
