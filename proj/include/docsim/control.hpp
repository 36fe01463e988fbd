#pragma once

#include <span>
#include <string>

namespace docsim::control {

/// PI controller state. P is the control signal in mini-slots.
struct ControllerState {
  double Kp = 0.0;
  double Ki = 0.0;
  double error_sum = 0.0;
  double P = 0.0;
  double P_initial = 0.0;
  double P_max = 0.0;
};

struct PunishmentParams {
  int N = 1;
  double t_star = 0.0;
  double p_min = 0.0;  // this station's component of the D-minimizer
  double delta = 0.0;  // D at the minimizer, <= 0
};

struct Gains {
  double Kp = 0.0;
  double Ki = 0.0;
};

/// Probability ceiling honest stations never exceed.
inline constexpr double kMaxAccessProbability = 0.999;

/// p = P / (T + (e-1) tau + P).
double control_to_probability(double P, double hold_time);

/// P = p / (1 - p) (T + (e-1) tau). Throws std::domain_error for p outside
/// [0, 1).
double probability_to_control(double p, double hold_time);

/// N t* - sum_j t_j.
double channel_deficit(std::span<const double> t, double t_star, int N);

/// Punishment term F_i, in mini-slots.
double punishment_F(std::span<const double> t, double p_i,
                    const PunishmentParams& params);

/// E_i = sum_{j != i} (t_j - t_i) - scale * F_i.
double error_signal(std::span<const double> t, std::size_t own, double p_i,
                    const PunishmentParams& params,
                    double punishment_scale = 1.0);

/// Position-form PI step with conditional integration: the error sum is
/// frozen when the output is clamped and E pushes further into the clamp.
ControllerState pi_update(ControllerState state, double E);

/// Swap gains without a jump in the integral contribution Ki * error_sum.
ControllerState retune(ControllerState state, Gains gains);

/// Ziegler-Nichols tuning from the ultimate gain 1/(2 N K_H) and a two
/// interval oscillation period.
Gains tune_gains(int N, double K_H);

/// Strict sufficient conditions for the linearized loop to be stable.
bool stability_check(double Kp, double Ki, int N, double K_H);

/// K_H = T_total / sum_j P_j.
double estimate_KH(double P_sum, double interval_length);

}  // namespace docsim::control
