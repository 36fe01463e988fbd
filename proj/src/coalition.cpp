#include "docsim/coalition.hpp"

#include <stdexcept>

#include "docsim/parallel.hpp"

namespace docsim {

CoalitionResult coalition_sweep(std::span<const strategies::Strategy> strategies_a,
                                std::span<const strategies::Strategy> strategies_b,
                                const EpisodeConfig& base, std::size_t station_a,
                                std::size_t station_b, std::size_t warmup,
                                std::uint64_t seed) {
  if (station_a == station_b || station_a >= base.stations.size() ||
      station_b >= base.stations.size())
    throw std::invalid_argument("coalition needs two distinct stations");

  CoalitionResult out;
  out.t_star = base.network().interval_length() /
               static_cast<double>(base.stations.size());

  EpisodeConfig honest = base;
  honest.record_traces = false;
  honest.stations[station_a].strategy = {};
  honest.stations[station_b].strategy = {};
  const auto ref = episode_throughput(run_episode(honest, seed), warmup);
  out.ref_a = ref[station_a];
  out.ref_b = ref[station_b];

  const std::size_t nb = strategies_b.size();
  out.points.resize(strategies_a.size() * nb);
  parallel_for(out.points.size(), [&](std::size_t idx) {
    EpisodeConfig cfg = honest;
    cfg.stations[station_a].strategy = strategies_a[idx / nb];
    cfg.stations[station_b].strategy = strategies_b[idx % nb];
    const auto res = run_episode(cfg, seed);
    const auto r = episode_throughput(res, warmup);
    const auto t = mean_channel_time(res, warmup);
    auto& pt = out.points[idx];
    pt.a_index = idx / nb;
    pt.b_index = idx % nb;
    pt.r_a = r[station_a];
    pt.r_b = r[station_b];
    pt.t_a = t[station_a];
    pt.t_b = t[station_b];
  });
  return out;
}

}  // namespace docsim
