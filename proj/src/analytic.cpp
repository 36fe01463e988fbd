#include "docsim/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/tools/roots.hpp>

namespace docsim {

void NetworkParams::validate() const {
  if (models.empty())
    throw std::invalid_argument("network needs at least one station");
  if (tx_slots <= 0)
    throw std::invalid_argument("transmission duration must be positive");
  if (interval_slots <= tx_slots + 1)
    throw std::invalid_argument(
        "interval length must exceed one transmission");
  for (const auto& m : models) m.validate();
}

namespace analytic {

namespace {

constexpr std::uintmax_t kMaxRootIterations = 400;

// Root of a monotone scalar function on [lo, hi] to full double precision.
template <class F>
double find_root(F f, double lo, double hi) {
  std::uintmax_t iterations = kMaxRootIterations;
  boost::math::tools::eps_tolerance<double> tol(
      std::numeric_limits<double>::digits - 3);
  const double flo = f(lo);
  const double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0.0) == (fhi > 0.0))
    throw SolverError("root is not bracketed");
  auto [a, b] =
      boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iterations);
  if (iterations >= kMaxRootIterations)
    throw SolverError("root search did not converge");
  return 0.5 * (a + b);
}

std::vector<double> inverse_channel_weights(std::span<const double> holds) {
  std::vector<double> w(holds.size());
  for (std::size_t i = 0; i < holds.size(); ++i)
    w[i] = 1.0 / (holds[i] + kAccessOverhead);
  return w;
}

std::vector<double> holds_of(std::span<const StationStats> stats) {
  std::vector<double> holds(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) holds[i] = stats[i].hold_time;
  return holds;
}

double deficit_from_holds(std::span<const double> p,
                          std::span<const double> holds,
                          double interval_length) {
  const auto ps_i = success_probabilities(p);
  double busy = 0.0;
  double ps = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    busy += ps_i[i] * holds[i];
    ps += ps_i[i];
  }
  const double num = busy + ps * kAccessOverhead;
  const double den = busy + (1.0 - ps) * kMiniSlot;
  return interval_length - interval_length * num / den;
}

// Given target per-station success probabilities s_i, the access
// probabilities are p_i = s_i / (Q + s_i) where Q = prod_j (1 - p_j) solves
//   sum_j ln(Q + s_j) - (N - 1) ln Q = 0.
double idle_equation(std::span<const double> s, double q) {
  double sum = 0.0;
  for (double sj : s) sum += std::log(q + sj);
  return sum - static_cast<double>(s.size() - 1) * std::log(q);
}

// q * d/dq of idle_equation; strictly increasing in q.
double idle_equation_slope(std::span<const double> s, double q) {
  double sum = 0.0;
  for (double sj : s) sum += q / (q + sj);
  return sum - static_cast<double>(s.size() - 1);
}

std::vector<double> access_from_idle(std::span<const double> s, double q) {
  std::vector<double> p(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) p[i] = s[i] / (q + s[i]);
  return p;
}

}  // namespace

StationStats station_stats(const channel::RateModel& model, double threshold,
                           const NetworkParams& params) {
  const double q = channel::tail_prob(model, threshold);
  StationStats st;
  st.threshold = threshold;
  st.hold_time = (1.0 - q) * kMiniSlot + q * (params.tx_duration() + kMiniSlot);
  const double payload =
      kBitsScaleWithHoldTime ? st.hold_time : params.tx_duration();
  st.bits_per_success = q > 0.0 ? channel::censored_mean(model, threshold) * payload
                                : 0.0;
  return st;
}

std::vector<StationStats> all_station_stats(const NetworkParams& params,
                                            std::span<const double> thresholds) {
  std::vector<StationStats> out;
  out.reserve(params.models.size());
  for (std::size_t i = 0; i < params.models.size(); ++i)
    out.push_back(station_stats(params.models[i], thresholds[i], params));
  return out;
}

std::vector<double> success_probabilities(std::span<const double> p) {
  const std::size_t n = p.size();
  std::vector<double> prefix(n + 1, 1.0);
  std::vector<double> suffix(n + 1, 1.0);
  for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] * (1.0 - p[i]);
  for (std::size_t i = n; i-- > 0;) suffix[i] = suffix[i + 1] * (1.0 - p[i]);
  std::vector<double> ps(n);
  for (std::size_t i = 0; i < n; ++i) ps[i] = p[i] * prefix[i] * suffix[i + 1];
  return ps;
}

Allocation throughput(std::span<const double> p,
                      std::span<const StationStats> stats,
                      const NetworkParams& /*params*/) {
  if (p.size() != stats.size())
    throw std::invalid_argument("throughput: p and stats sizes differ");
  Allocation a;
  a.p.assign(p.begin(), p.end());
  a.ps_i = success_probabilities(p);
  a.ps = std::accumulate(a.ps_i.begin(), a.ps_i.end(), 0.0);
  double den = (1.0 - a.ps) * kMiniSlot;
  for (std::size_t j = 0; j < p.size(); ++j) den += a.ps_i[j] * stats[j].hold_time;
  a.r.resize(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    a.r[i] = den > 0.0 ? a.ps_i[i] * stats[i].bits_per_success / den : 0.0;
  return a;
}

double solve_threshold(const channel::RateModel& model,
                       const NetworkParams& params) {
  const double mean = channel::mean_rate(model);
  if (!(mean > 0.0) || !std::isfinite(mean))
    throw SolverError("threshold: mean rate must be finite and positive");
  const double slope = kMiniSlot * kE / params.tx_duration();
  auto f = [&](double x) { return channel::excess_mean(model, x) - x * slope; };

  double hi = mean;
  while (f(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 60.0 * mean)
      throw SolverError("threshold: fixed point not bracketed below 60 E[R]");
  }
  const double x = find_root(f, 0.0, hi);
  if (std::abs(f(x)) > 1e-9 * mean)
    throw SolverError("threshold: residual above tolerance");
  return x;
}

double lone_station_rate(const channel::RateModel& model, double threshold,
                         const NetworkParams& params) {
  const auto st = station_stats(model, threshold, params);
  return st.bits_per_success / (st.hold_time + kAccessOverhead);
}

AccessRoots solve_access_roots(std::span<const StationStats> stats) {
  const std::size_t n = stats.size();
  if (n == 0) throw std::invalid_argument("access roots: no stations");
  if (n == 1) return {{1.0 / kE}, {1.0 / kE}};

  // Equal channel times and sum p_s,i = 1/e fix every p_s,i.
  auto w = inverse_channel_weights(holds_of(stats));
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = w[i] / (kE * wsum);

  auto slope = [&](double q) { return idle_equation_slope(s, q); };
  const double q_turn = find_root(slope, 0.0, 1.0);
  auto g = [&](double q) { return idle_equation(s, q); };
  if (g(q_turn) >= 0.0)
    throw SolverError("access system has no solution for these hold times");

  double q_lo = q_turn;
  for (int k = 0; k < 2000 && g(q_lo) <= 0.0; ++k) q_lo *= 0.5;
  if (g(q_lo) <= 0.0) throw SolverError("access system: lower root not bracketed");
  const double q_small = find_root(g, q_lo, q_turn);
  const double q_large = find_root(g, q_turn, 1.0);
  return {access_from_idle(s, q_small), access_from_idle(s, q_large)};
}

std::vector<double> solve_optimal_p(std::span<const StationStats> stats) {
  return solve_access_roots(stats).larger;
}

std::vector<double> solve_optimal_p_from_holds(std::span<const double> holds) {
  std::vector<StationStats> stats(holds.size());
  for (std::size_t i = 0; i < holds.size(); ++i) stats[i].hold_time = holds[i];
  return solve_optimal_p(stats);
}

AccessResiduals access_residuals(std::span<const double> p,
                                 std::span<const StationStats> stats) {
  const auto ps_i = success_probabilities(p);
  const double ps = std::accumulate(ps_i.begin(), ps_i.end(), 0.0);
  AccessResiduals res;
  res.success_sum = std::abs(ps - 1.0 / kE);
  const double overhead = kMiniSlot * (1.0 / ps - 1.0);
  for (std::size_t i = 1; i < p.size(); ++i) {
    const double lhs = ps_i[i] / ps_i[0];
    const double rhs =
        (stats[0].hold_time + overhead) / (stats[i].hold_time + overhead);
    res.max_ratio = std::max(res.max_ratio, std::abs(lhs / rhs - 1.0));
  }
  return res;
}

double proportional_fairness(std::span<const double> r) {
  double sum = 0.0;
  for (double ri : r) {
    if (!(ri > 0.0)) return -std::numeric_limits<double>::infinity();
    sum += std::log(ri);
  }
  return sum;
}

double proportional_fairness(const Allocation& alloc) {
  return proportional_fairness(alloc.r);
}

bool is_fairness_flagged(double value) { return !std::isfinite(value); }

std::vector<int> monotonicity_signs(std::span<const double> p,
                                    std::span<const StationStats> stats,
                                    const NetworkParams& params) {
  std::vector<int> signs(p.size());
  std::vector<double> probe(p.begin(), p.end());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double h = 1e-6;
    const double lo = std::max(0.0, p[i] - h);
    const double hi = std::min(1.0, p[i] + h);
    probe[i] = hi;
    const double r_hi = throughput(probe, stats, params).r[i];
    probe[i] = lo;
    const double r_lo = throughput(probe, stats, params).r[i];
    probe[i] = p[i];
    const double diff = r_hi - r_lo;
    signs[i] = diff > 0.0 ? 1 : (diff < 0.0 ? -1 : 0);
  }
  return signs;
}

double analytic_D(std::span<const double> p,
                  std::span<const StationStats> stats,
                  const NetworkParams& params) {
  return deficit_from_holds(p, holds_of(stats), params.interval_length());
}

std::vector<double> expected_channel_times(std::span<const double> p,
                                           std::span<const StationStats> stats,
                                           const NetworkParams& params) {
  const auto ps_i = success_probabilities(p);
  double ps = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    ps += ps_i[i];
    den += ps_i[i] * stats[i].hold_time;
  }
  den += (1.0 - ps) * kMiniSlot;
  std::vector<double> t(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    t[i] = params.interval_length() * ps_i[i] *
           (stats[i].hold_time + kAccessOverhead) / den;
  return t;
}

PminResult solve_pmin_from_holds(std::span<const double> holds,
                                 double interval_length) {
  const std::size_t n = holds.size();
  if (n < 2) throw std::invalid_argument("pmin needs at least two stations");

  // On the manifold p_s,i = lambda w_i with sum w = 1 the total success
  // probability is lambda, and D decreases as lambda grows. Parametrize by
  // Q = prod (1 - p_j); lambda(Q) is a hump vanishing at both ends.
  auto w = inverse_channel_weights(holds);
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& wi : w) wi /= wsum;
  const double others = static_cast<double>(n - 1);

  auto manifold_lambda = [&](double q) {
    auto f = [&](double lambda) {
      double sum = 0.0;
      for (double wi : w) sum += std::log(q + lambda * wi);
      return sum - others * std::log(q);
    };
    double hi = 1.0;
    while (f(hi) < 0.0) hi *= 2.0;
    return find_root(f, 0.0, hi);
  };
  // Sign of -d lambda / dQ (implicit differentiation numerator).
  auto stationarity = [&](double q) {
    const double lambda = manifold_lambda(q);
    double sum = 0.0;
    for (double wi : w) sum += q / (q + lambda * wi);
    return sum - others;
  };

  constexpr double kEdge = 1e-9;
  const double s_lo = stationarity(kEdge);
  const double s_hi = stationarity(1.0 - kEdge);
  if (!(s_lo < 0.0 && s_hi > 0.0))
    throw SolverError("pmin: manifold search does not bracket a maximum");
  const double q = find_root(stationarity, kEdge, 1.0 - kEdge);
  const double lambda = manifold_lambda(q);

  PminResult out;
  out.p.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.p[i] = lambda * w[i] / (q + lambda * w[i]);
  out.success_prob = lambda;
  out.delta = deficit_from_holds(out.p, holds, interval_length);
  return out;
}

PminResult solve_pmin(std::span<const StationStats> stats,
                      const NetworkParams& params) {
  return solve_pmin_from_holds(holds_of(stats), params.interval_length());
}

OptimalConfig optimal_configuration(const NetworkParams& params) {
  params.validate();
  OptimalConfig cfg;
  for (const auto& m : params.models)
    cfg.thresholds.push_back(solve_threshold(m, params));
  cfg.stats = all_station_stats(params, cfg.thresholds);
  cfg.p = solve_optimal_p(cfg.stats);
  cfg.allocation = throughput(cfg.p, cfg.stats, params);
  return cfg;
}

}  // namespace analytic
}  // namespace docsim
