#include "mfglq/rng.hpp"

#include <cmath>
#include <numbers>

namespace mfglq {

double RandomStream::normal(std::uint64_t i) const {
  const double u1 = uniform(2 * i);
  const double u2 = uniform(2 * i + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RandomStream player_stream(std::uint64_t seed, std::uint64_t salt,
                           std::uint64_t replication, std::uint64_t player) {
  return RandomStream(seed).child(salt).child(replication).child(player);
}

}  // namespace mfglq
