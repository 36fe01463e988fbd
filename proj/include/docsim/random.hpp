#pragma once

#include <cstdint>
#include <random>

namespace docsim {

using Rng = std::mt19937_64;

/// Stream purposes keep contention draws and channel draws of one station
/// independent even though both derive from the same master seed.
enum class StreamPurpose : std::uint32_t {
  kChannel = 1,
  kContention = 2,
  kJakesPhases = 3,
  kExperiment = 4,
};

/// Deterministic, order-independent stream for (master seed, replication,
/// station, purpose). Station index -1 denotes the network-wide stream.
inline Rng make_stream(std::uint64_t master_seed, std::uint64_t replication,
                       std::int64_t station, StreamPurpose purpose) {
  const auto st = static_cast<std::uint64_t>(station + 1);
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                    static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(replication),
                    static_cast<std::uint32_t>(replication >> 32),
                    static_cast<std::uint32_t>(st),
                    static_cast<std::uint32_t>(st >> 32),
                    static_cast<std::uint32_t>(purpose)};
  return Rng(seq);
}

inline double uniform01(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace docsim
