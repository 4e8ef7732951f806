#pragma once

#include <cstdint>
#include <initializer_list>

namespace facialpulse {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Derives a child seed from a parent seed and a path of integer tags, e.g.
// derive_seed(global, {kStreamTag, sample_index}). Every random component
// draws from a seed obtained this way; nothing reads ambient entropy.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t tag : path) h = mix64(h ^ mix64(tag + 0x632BE59BD9B4E019ULL));
  return h;
}

}  // namespace facialpulse
