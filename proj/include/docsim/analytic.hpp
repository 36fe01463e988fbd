#pragma once

#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "docsim/channel.hpp"

namespace docsim {

/// Duration of one contention mini-slot. All times are expressed in
/// mini-slots, so this is the unit.
inline constexpr double kMiniSlot = 1.0;
inline constexpr double kE = std::numbers::e;
/// Per-access overhead (e - 1) tau added to every success in channel time.
inline constexpr double kAccessOverhead = (kE - 1.0) * kMiniSlot;

/// Raised when a root finder or search cannot produce a certified answer.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Global constants of the network.
struct NetworkParams {
  int tx_slots = 10;                    // transmission duration, mini-slots
  std::int64_t interval_slots = 100000; // controller interval T_total
  std::vector<channel::RateModel> models;

  int station_count() const { return static_cast<int>(models.size()); }
  double tx_duration() const { return tx_slots * kMiniSlot; }
  double interval_length() const {
    return static_cast<double>(interval_slots) * kMiniSlot;
  }
  void validate() const;
};

namespace analytic {

/// Bits carried by a transmission are rate x (this duration). The data portion
/// excludes the winning contention mini-slot. Flip to use the mean hold time
/// instead.
inline constexpr bool kBitsScaleWithHoldTime = false;

struct StationStats {
  double hold_time = kMiniSlot;   // mean channel-hold per success, mini-slots
  double bits_per_success = 0.0;  // bits/s x mini-slots per success
  double threshold = 0.0;         // rate threshold, bits/s
};

struct Allocation {
  std::vector<double> p;
  std::vector<double> r;     // bits/s
  std::vector<double> ps_i;  // per-station success probability
  double ps = 0.0;
};

StationStats station_stats(const channel::RateModel& model, double threshold,
                           const NetworkParams& params);

/// Stats for every station given per-station thresholds.
std::vector<StationStats> all_station_stats(const NetworkParams& params,
                                            std::span<const double> thresholds);

/// p_i prod_{j != i} (1 - p_j), robust to entries equal to 1.
std::vector<double> success_probabilities(std::span<const double> p);

Allocation throughput(std::span<const double> p,
                      std::span<const StationStats> stats,
                      const NetworkParams& params);

/// Optimal rate threshold: E(R - x)^+ = x tau e / T.
double solve_threshold(const channel::RateModel& model,
                       const NetworkParams& params);

/// Single-station throughput l(x) / (T(x) + (e - 1) tau) at threshold x.
double lone_station_rate(const channel::RateModel& model, double threshold,
                         const NetworkParams& params);

/// Both solutions of the proportional-fair access system; `larger` dominates
/// `smaller` componentwise.
struct AccessRoots {
  std::vector<double> larger;
  std::vector<double> smaller;
};
AccessRoots solve_access_roots(std::span<const StationStats> stats);

/// Optimal access probabilities (the larger root). N = 1 yields 1/e.
std::vector<double> solve_optimal_p(std::span<const StationStats> stats);

struct AccessResiduals {
  double success_sum = 0.0;  // |sum p_s,i - 1/e|
  double max_ratio = 0.0;    // max_i relative error of the channel-time ratio
};
AccessResiduals access_residuals(std::span<const double> p,
                                 std::span<const StationStats> stats);

/// Proportional-fairness objective sum_i ln r_i. Returns -infinity when any
/// r_i is not positive; see is_fairness_flagged.
double proportional_fairness(std::span<const double> r);
double proportional_fairness(const Allocation& alloc);
bool is_fairness_flagged(double value);

/// Sign (+1, 0, -1) of d r_i / d p_i by central finite differences.
std::vector<int> monotonicity_signs(std::span<const double> p,
                                    std::span<const StationStats> stats,
                                    const NetworkParams& params);

/// Expected channel-time deficit N t* - sum_j t_j over one interval.
double analytic_D(std::span<const double> p,
                  std::span<const StationStats> stats,
                  const NetworkParams& params);

/// Expected channel time of each station over one interval.
std::vector<double> expected_channel_times(std::span<const double> p,
                                           std::span<const StationStats> stats,
                                           const NetworkParams& params);

/// D-minimizer on the equal-channel-time manifold, and D there.
struct PminResult {
  std::vector<double> p;
  double delta = 0.0;
  double success_prob = 0.0;
};

/// Hold times are taken from `hold_times` (mini-slots), one per station.
PminResult solve_pmin_from_holds(std::span<const double> hold_times,
                                 double interval_length);
PminResult solve_pmin(std::span<const StationStats> stats,
                      const NetworkParams& params);

/// Optimal access probabilities from hold times alone.
std::vector<double> solve_optimal_p_from_holds(std::span<const double> hold_times);

/// Complete optimal configuration of a network.
struct OptimalConfig {
  std::vector<double> thresholds;
  std::vector<StationStats> stats;
  std::vector<double> p;
  Allocation allocation;
};
OptimalConfig optimal_configuration(const NetworkParams& params);

}  // namespace analytic
}  // namespace docsim
