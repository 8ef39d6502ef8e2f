#pragma once

#include <cstdint>

namespace mfglq {

// Counter-based random streams. Every draw is a pure function of
// (key, counter), so replications and players can be simulated in any order,
// on any number of threads, with identical output.

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Keyed index mix used to derive child keys; the +1 keeps index 0 distinct
// from the parent key.
constexpr std::uint64_t prf(std::uint64_t key, std::uint64_t index) {
  return mix64(key + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  RandomStream child(std::uint64_t index) const { return RandomStream(prf(key_, index)); }

  std::uint64_t bits(std::uint64_t counter) const { return mix64(key_ ^ prf(key_, counter)); }

  // Uniform draw in (0, 1]; never returns 0 so log() is safe.
  double uniform(std::uint64_t counter) const {
    return ((bits(counter) >> 11) + 1.0) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller on counters (2i, 2i+1).
  double normal(std::uint64_t i) const;

 private:
  std::uint64_t key_;
};

// Stream for one simulated player: seed -> salt -> replication -> player.
RandomStream player_stream(std::uint64_t seed, std::uint64_t salt,
                           std::uint64_t replication, std::uint64_t player);

}  // namespace mfglq
