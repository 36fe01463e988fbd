#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "docsim/analytic.hpp"
#include "docsim/sim.hpp"
#include "docsim/strategies.hpp"

namespace docsim {

/// One station of an episode. Non-DOC strategies take over at
/// `selfish_from`; before that the station runs the DOC controller.
struct StationSetup {
  channel::RateModel model;
  strategies::Strategy strategy;
  std::int64_t selfish_from = 0;
  std::int64_t join_interval = 0;
  std::int64_t leave_interval = std::numeric_limits<std::int64_t>::max();
  // NaN starts the controller at the analytic optimum.
  double initial_p = std::numeric_limits<double>::quiet_NaN();
};

struct EpisodeConfig {
  int tx_slots = 10;
  std::int64_t interval_slots = 100000;
  std::vector<StationSetup> stations;
  strategies::ControllerConfig controller;
  std::int64_t intervals = 200;
  sim::Engine engine = sim::Engine::kAggregated;
  std::size_t throughput_window = 5;
  std::size_t hold_window = 10;
  bool record_traces = true;

  NetworkParams network() const;
  void validate() const;
};

struct TraceRow {
  std::int64_t interval = 0;
  std::size_t station = 0;
  double p = 0.0;
  double P = 0.0;
  double E = 0.0;
  double F = 0.0;
  double t = 0.0;
  double bits = 0.0;
  std::int64_t successes = 0;
};

struct EpisodeResult {
  std::vector<sim::IntervalReport> reports;
  std::vector<TraceRow> trace;
  // p_history[k][i]: access probability used in interval k (0 if inactive).
  std::vector<std::vector<double>> p_history;
  std::vector<double> thresholds;  // honest thresholds
  std::vector<double> optimal_p;   // all stations active
  double interval_length = 0.0;
};

EpisodeResult run_episode(const EpisodeConfig& config, std::uint64_t seed,
                          std::uint64_t replication = 0);

/// Per-station bits/s over intervals [first, end) of one episode.
std::vector<double> episode_throughput(const EpisodeResult& result,
                                       std::size_t first_interval);

/// Per-station mean channel time per interval over [first, end).
std::vector<double> mean_channel_time(const EpisodeResult& result,
                                      std::size_t first_interval);

}  // namespace docsim
