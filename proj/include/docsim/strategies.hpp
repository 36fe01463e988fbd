#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "docsim/analytic.hpp"
#include "docsim/control.hpp"
#include "docsim/sim.hpp"

namespace docsim::strategies {

enum class StrategyKind {
  kDoc,
  kFixed,
  kAdaptiveP,
  kAdaptiveThreshold,
  kAdaptiveBoth,
};

std::string to_string(StrategyKind kind);
StrategyKind strategy_kind_from_string(const std::string& name);
bool is_adaptive(StrategyKind kind);

struct Strategy {
  StrategyKind kind = StrategyKind::kDoc;
  double fixed_p = 0.0;
  double fixed_threshold = 0.0;  // bits/s
  double reference_rate = 0.0;   // throughput under all-DOC, bits/s
  double hysteresis_low = 0.95;

  void validate() const;
};

/// {p, threshold} a station transmits with during one interval.
struct Configuration {
  double p = 0.0;
  double threshold = 0.0;
};

enum class AdaptiveMode { kSelfish, kHonest };

struct AdaptiveDecision {
  Configuration config;
  AdaptiveMode mode = AdaptiveMode::kSelfish;
};

/// Two-state attacker: selfish while it gains, honest once it stops gaining,
/// selfish again once throughput recovers above hysteresis_low * r*.
AdaptiveDecision adaptive_selfish_policy(const Strategy& strategy,
                                         AdaptiveMode current,
                                         double last_throughput,
                                         Configuration honest);

/// Configuration an adaptive strategy uses while selfish.
Configuration selfish_configuration(const Strategy& strategy,
                                    Configuration honest);

/// Cartesian product of fixed strategies. Threshold entries are absolute
/// rates. Duplicate grid values are dropped.
std::vector<Strategy> fixed_attack_grid(std::vector<double> p_grid,
                                        std::vector<double> threshold_grid);

/// p in {0.05, ..., 1.0} and threshold scale in {0, 0.25, ..., 2.0}.
std::vector<double> default_p_grid();
std::vector<double> default_threshold_scales();

enum class GainMode { kZieglerNichols, kManual };

/// Where an honest station takes K_H from when tuning its gains.
enum class KhEstimate {
  // T_total / sum_j P_j* at the optimum implied by observed hold times.
  kOperatingPoint,
  // T_total / (N P_own): assumes every station has the same control signal.
  kOwnControl,
};

struct ControllerConfig {
  GainMode gain_mode = GainMode::kZieglerNichols;
  KhEstimate kh_estimate = KhEstimate::kOwnControl;
  double Kp = 0.0;  // manual mode
  double Ki = 0.0;  // manual mode
  double gain_scale = 1.0;
  double punishment_scale = 1.0;
};

/// What every honest station observes at an interval boundary: channel times
/// and hold-time estimates of all active stations, plus the punishment
/// parameters derived from them.
struct NetworkView {
  std::vector<std::size_t> active;  // station ids
  std::vector<double> t;            // channel times, aligned with `active`
  std::vector<double> holds;        // mean hold estimates, aligned
  std::vector<double> p_min;
  std::vector<double> p_star;
  double delta = 0.0;
  double t_star = 0.0;
  double interval_length = 0.0;

  int N() const { return static_cast<int>(active.size()); }
};

NetworkView observe(const sim::IntervalReport& report,
                    std::span<const std::size_t> active,
                    std::span<const double> holds, double interval_length);

/// Trailing-window estimate of every station's mean hold time.
class HoldTracker {
 public:
  HoldTracker(std::size_t window, double fallback)
      : window_(window), fallback_(fallback) {}

  void record(const sim::IntervalReport& report);
  double estimate(std::size_t station) const;
  void reset(std::size_t station);

 private:
  struct Entry {
    std::deque<std::pair<double, std::int64_t>> samples;
  };
  std::size_t window_;
  double fallback_;
  std::vector<Entry> entries_;
};

/// One honest station running the DOC controller with a fixed threshold.
class DocPolicy {
 public:
  struct Step {
    double p = 0.0;
    double P = 0.0;
    double E = 0.0;
    double F = 0.0;
  };

  DocPolicy(ControllerConfig config, double hold_time, double threshold,
            double initial_p);

  /// Applies one interval of feedback; `position` is this station's index
  /// within view.active.
  Step update(const NetworkView& view, std::size_t position);

  double p() const { return p_; }
  double threshold() const { return threshold_; }
  const control::ControllerState& state() const { return state_; }
  double hold_time() const { return hold_time_; }

 private:
  control::Gains gains_for(const NetworkView& view) const;

  ControllerConfig config_;
  double hold_time_;
  double threshold_;
  double p_;
  control::ControllerState state_;
};

}  // namespace docsim::strategies
