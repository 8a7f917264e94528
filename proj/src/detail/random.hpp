#pragma once

// Seeded shuffling that is identical across standard libraries:
// std::shuffle and std::uniform_int_distribution are implementation-defined,
// mt19937_64 and seed_seq are not.

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "detail/hashing.hpp"

namespace toonbench::detail {

inline std::mt19937_64 make_engine(std::uint64_t seed, std::string_view stream) {
  std::string material = std::to_string(seed);
  material.push_back('\0');
  material.append(stream);
  const auto digest = sha256(material);
  std::vector<std::uint32_t> words;
  for (std::size_t i = 0; i < digest.size(); i += 4) {
    words.push_back(std::uint32_t{digest[i]} << 24 | std::uint32_t{digest[i + 1]} << 16 |
                    std::uint32_t{digest[i + 2]} << 8 | std::uint32_t{digest[i + 3]});
  }
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

/// Unbiased integer in [0, bound).
inline std::uint64_t uniform_below(std::mt19937_64& engine, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t draw = engine();
  while (draw >= limit) draw = engine();
  return draw % bound;
}

template <typename T>
void shuffle(std::vector<T>& items, std::mt19937_64& engine) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(engine, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace toonbench::detail
