#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "docsim/analytic.hpp"
#include "docsim/channel.hpp"
#include "docsim/random.hpp"

namespace docsim::sim {

enum class SlotKind { kIdle, kCollision, kSuccess };

struct SlotOutcome {
  SlotKind kind = SlotKind::kIdle;
  int winner = -1;
  bool transmitted = false;
  double rate = 0.0;  // bits/s, success only
  int duration = 1;   // mini-slots
};

/// Observables of one controller interval. Indexed by station id; stations
/// that are not active simply accumulate nothing.
struct IntervalReport {
  std::vector<double> t;                    // channel time, mini-slots
  std::vector<std::int64_t> n;              // successful contentions
  std::vector<std::int64_t> transmissions;  // successes that used the slot
  std::vector<double> bits;                 // delivered bits
  std::vector<double> hold;                 // summed hold durations
  std::int64_t idle_slots = 0;
  std::int64_t collision_slots = 0;
  std::int64_t success_slots = 0;
  std::int64_t elapsed = 0;  // mini-slots

  explicit IntervalReport(std::size_t stations = 0);
  std::size_t stations() const { return t.size(); }
  std::int64_t busy_slots() const;
  double throughput_bps(std::size_t station) const;
  /// Mean hold time per success, or `fallback` without successes.
  double mean_hold(std::size_t station, double fallback) const;
};

/// How run_interval draws contention outcomes.
enum class Engine {
  // One Bernoulli draw per station per mini-slot.
  kPerSlot,
  // Access probabilities are fixed within an interval, so runs of idle and
  // collision slots are geometric and the winner of a success is
  // categorical. Same distribution, far fewer draws.
  kAggregated,
};

/// Random state of one replication: a channel sampler and a contention
/// stream per station plus a network stream, and the global slot clock.
class ContentionContext {
 public:
  ContentionContext(std::span<const channel::RateModel> models, int tx_slots,
                    std::uint64_t seed, std::uint64_t replication);

  /// Registers a new station; returns its id.
  std::size_t add_station(const channel::RateModel& model);

  std::size_t stations() const { return channels_.size(); }
  int tx_slots() const { return tx_slots_; }
  std::int64_t now() const { return now_; }

  channel::ChannelSampler& channel(std::size_t i) { return channels_[i]; }
  Rng& station_rng(std::size_t i) { return station_rngs_[i]; }
  Rng& network_rng() { return network_rng_; }
  void advance(std::int64_t slots) { now_ += slots; }

 private:
  int tx_slots_;
  std::uint64_t seed_;
  std::uint64_t replication_;
  std::int64_t now_ = 0;
  std::vector<channel::ChannelSampler> channels_;
  std::vector<Rng> station_rngs_;
  Rng network_rng_;
};

/// One mini-slot: every station contends with its own probability.
SlotOutcome run_slot(std::span<const double> p,
                     std::span<const double> thresholds,
                     ContentionContext& ctx);

/// Runs slots until the elapsed time reaches the interval length. A
/// transmission in progress is never truncated.
IntervalReport run_interval(std::span<const double> p,
                            std::span<const double> thresholds,
                            std::int64_t interval_slots, ContentionContext& ctx,
                            Engine engine = Engine::kAggregated);

struct MeanCI {
  double mean = 0.0;
  double half_width = 0.0;  // 95% Student-t; 0 for a single sample
  bool ci_free = false;     // fewer than two samples
};

MeanCI mean_ci(std::span<const double> samples);

struct ThroughputEstimate {
  std::vector<double> mean_bps;
  std::vector<double> half_width;
  bool ci_free = false;
};

/// Per-station throughput per replication over intervals [first, end).
std::vector<double> window_throughput(std::span<const IntervalReport> reports,
                                      std::size_t first_interval);

/// Mean over replications of bits / elapsed with 95% half-widths.
ThroughputEstimate measure_throughput(
    std::span<const std::vector<IntervalReport>> replications,
    std::size_t first_interval = 0);

}  // namespace docsim::sim
