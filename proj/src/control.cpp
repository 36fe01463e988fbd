#include "docsim/control.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "docsim/analytic.hpp"

namespace docsim::control {

double control_to_probability(double P, double hold_time) {
  const double P_clamped = std::max(0.0, P);
  return P_clamped / (hold_time + kAccessOverhead + P_clamped);
}

double probability_to_control(double p, double hold_time) {
  if (!(p >= 0.0) || !(p < 1.0))
    throw std::domain_error("control signal is unbounded for p outside [0, 1)");
  return p / (1.0 - p) * (hold_time + kAccessOverhead);
}

double channel_deficit(std::span<const double> t, double t_star, int N) {
  return N * t_star - std::accumulate(t.begin(), t.end(), 0.0);
}

double punishment_F(std::span<const double> t, double p_i,
                    const PunishmentParams& params) {
  const double N = params.N;
  const double D = channel_deficit(t, params.t_star, params.N);
  if (p_i > params.p_min) return std::min((N - 1.0) * D, D / N);
  return std::min({(N - 1.0) * D, -D / N, (N - 1.0) * params.delta});
}

double error_signal(std::span<const double> t, std::size_t own, double p_i,
                    const PunishmentParams& params, double punishment_scale) {
  double others = 0.0;
  for (std::size_t j = 0; j < t.size(); ++j)
    if (j != own) others += t[j] - t[own];
  return others - punishment_scale * punishment_F(t, p_i, params);
}

ControllerState pi_update(ControllerState state, double E) {
  auto output = [&](double sum) {
    return state.P_initial + state.Kp * E + state.Ki * sum;
  };
  const double advanced = state.error_sum + E;
  const double raw = output(advanced);
  const bool deepens_high = raw > state.P_max && E > 0.0;
  const bool deepens_low = raw < 0.0 && E < 0.0;
  if (!(deepens_high || deepens_low)) state.error_sum = advanced;
  state.P = std::clamp(output(state.error_sum), 0.0, state.P_max);
  return state;
}

ControllerState retune(ControllerState state, Gains gains) {
  if (gains.Ki > 0.0 && state.Ki > 0.0)
    state.error_sum *= state.Ki / gains.Ki;
  state.Kp = gains.Kp;
  state.Ki = gains.Ki;
  return state;
}

Gains tune_gains(int N, double K_H) {
  if (N < 1 || !(K_H > 0.0))
    throw std::invalid_argument("tune_gains needs N >= 1 and K_H > 0");
  const double ultimate = 1.0 / (2.0 * N * K_H);
  const double period = 2.0;
  Gains g;
  g.Kp = 0.4 * ultimate;
  g.Ki = g.Kp / (0.85 * period);
  return g;
}

bool stability_check(double Kp, double Ki, int N, double K_H) {
  const double margin = 1.0 / (N * K_H);
  return Ki < Kp + margin && Ki > 2.0 * Kp - margin;
}

double estimate_KH(double P_sum, double interval_length) {
  if (!(P_sum > 0.0))
    throw std::invalid_argument("estimate_KH needs a positive control sum");
  return interval_length / P_sum;
}

}  // namespace docsim::control
