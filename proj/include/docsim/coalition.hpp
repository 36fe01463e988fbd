#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "docsim/episode.hpp"

namespace docsim {

struct CoalitionPoint {
  std::size_t a_index = 0;  // into strategies_a
  std::size_t b_index = 0;  // into strategies_b
  double r_a = 0.0;         // bits/s
  double r_b = 0.0;
  double t_a = 0.0;  // mean channel time per interval
  double t_b = 0.0;
};

struct CoalitionResult {
  double ref_a = 0.0;  // all-DOC throughputs of the two stations
  double ref_b = 0.0;
  double t_star = 0.0;
  std::vector<CoalitionPoint> points;
};

/// Runs one episode per strategy pair for stations `station_a` and
/// `station_b` of `base`, measuring after `warmup` intervals. The reference
/// pair comes from the same episode with both stations honest.
CoalitionResult coalition_sweep(std::span<const strategies::Strategy> strategies_a,
                                std::span<const strategies::Strategy> strategies_b,
                                const EpisodeConfig& base, std::size_t station_a,
                                std::size_t station_b, std::size_t warmup,
                                std::uint64_t seed);

}  // namespace docsim
