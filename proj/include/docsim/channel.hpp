#pragma once

#include <array>
#include <string>
#include <vector>

#include "docsim/random.hpp"

namespace docsim::channel {

enum class ChannelKind {
  kIidRayleigh,
  kJakesRayleigh,
  kDiscreteMapped,
  // R is the same constant every draw. Used for closed-form checks.
  kConstant,
};

std::string to_string(ChannelKind kind);
ChannelKind channel_kind_from_string(const std::string& name);

/// Per-station rate distribution. Rates are in bits/s; time is in mini-slots.
///
/// Immutable description: all sampling state lives in ChannelSampler.
struct RateModel {
  ChannelKind kind = ChannelKind::kIidRayleigh;
  double bandwidth = 1e7;  // W, bits/s per unit of log2(1+snr)
  double rho = 1.0;        // normalized mean SNR
  double doppler = 0.0;    // radians per mini-slot (Jakes only)
  std::vector<double> rate_table;  // ascending, bits/s (discrete only)
  double constant_rate = 0.0;      // bits/s (constant only)

  static RateModel iid_rayleigh(double bandwidth, double rho);
  static RateModel jakes_rayleigh(double bandwidth, double rho, double doppler);
  static RateModel discrete_mapped(double bandwidth, double rho,
                                   std::vector<double> rate_table);
  static RateModel constant(double rate);

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;
};

/// Rate table of the discrete experiments, in bits/s.
std::vector<double> default_rate_table();

/// W log2(1 + rho |h|^2).
double shannon_rate(const RateModel& model, double gain_squared);

/// Largest table entry strictly below `shannon`, or 0 when there is none.
double floor_to_table(const std::vector<double>& table, double shannon);

/// P(R >= threshold) under the stationary distribution.
double tail_prob(const RateModel& model, double threshold);

/// E[R 1{R >= threshold}].
double censored_mean(const RateModel& model, double threshold);

/// E[(R - threshold)^+].
double excess_mean(const RateModel& model, double threshold);

double mean_rate(const RateModel& model);

/// Probability mass of each table entry (index-aligned with rate_table) plus
/// the mass of the zero rate, returned last.
std::vector<double> discrete_bin_masses(const RateModel& model);

/// Sum-of-sinusoids Rayleigh process (16 oscillators per quadrature branch).
class JakesProcess {
 public:
  static constexpr int kOscillators = 16;

  JakesProcess() = default;
  JakesProcess(double doppler, Rng& rng);

  /// Complex gain h(t); E|h|^2 = 1.
  std::array<double, 2> gain(double now) const;
  double gain_squared(double now) const;

 private:
  double doppler_ = 0.0;
  std::array<double, kOscillators> freq_i_{};
  std::array<double, kOscillators> freq_q_{};
  std::array<double, kOscillators> phase_i_{};
  std::array<double, kOscillators> phase_q_{};
};

/// Sampling context for one station in one replication. Single-threaded.
class ChannelSampler {
 public:
  ChannelSampler(RateModel model, Rng rng);

  /// Instantaneous rate for a contention won at time `now` (mini-slots).
  double sample(double now);

  const RateModel& model() const { return model_; }

 private:
  RateModel model_;
  Rng rng_;
  JakesProcess jakes_;
};

}  // namespace docsim::channel
