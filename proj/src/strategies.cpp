#include "docsim/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace docsim::strategies {

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kDoc:
      return "doc";
    case StrategyKind::kFixed:
      return "fixed";
    case StrategyKind::kAdaptiveP:
      return "adaptive-p";
    case StrategyKind::kAdaptiveThreshold:
      return "adaptive-threshold";
    case StrategyKind::kAdaptiveBoth:
      return "adaptive-both";
  }
  return "unknown";
}

StrategyKind strategy_kind_from_string(const std::string& name) {
  if (name == "doc") return StrategyKind::kDoc;
  if (name == "fixed") return StrategyKind::kFixed;
  if (name == "adaptive-p") return StrategyKind::kAdaptiveP;
  if (name == "adaptive-threshold") return StrategyKind::kAdaptiveThreshold;
  if (name == "adaptive-both") return StrategyKind::kAdaptiveBoth;
  throw std::invalid_argument("unknown strategy kind '" + name + "'");
}

bool is_adaptive(StrategyKind kind) {
  return kind == StrategyKind::kAdaptiveP ||
         kind == StrategyKind::kAdaptiveThreshold ||
         kind == StrategyKind::kAdaptiveBoth;
}

void Strategy::validate() const {
  if (kind == StrategyKind::kFixed) {
    if (!(fixed_p >= 0.0 && fixed_p <= 1.0))
      throw std::invalid_argument("fixed strategy needs p in [0, 1]");
    if (!(fixed_threshold >= 0.0))
      throw std::invalid_argument("fixed strategy needs a threshold >= 0");
  }
  if (is_adaptive(kind)) {
    if (!(reference_rate > 0.0))
      throw std::invalid_argument("adaptive strategy needs reference_rate > 0");
    if (!(hysteresis_low > 0.0 && hysteresis_low <= 1.0))
      throw std::invalid_argument("hysteresis_low must lie in (0, 1]");
  }
}

Configuration selfish_configuration(const Strategy& strategy,
                                    Configuration honest) {
  switch (strategy.kind) {
    case StrategyKind::kAdaptiveP:
      return {1.0, honest.threshold};
    case StrategyKind::kAdaptiveThreshold:
      return {honest.p, 0.0};
    case StrategyKind::kAdaptiveBoth:
      return {1.0, 0.0};
    case StrategyKind::kFixed:
      return {strategy.fixed_p, strategy.fixed_threshold};
    case StrategyKind::kDoc:
      return honest;
  }
  return honest;
}

AdaptiveDecision adaptive_selfish_policy(const Strategy& strategy,
                                         AdaptiveMode current,
                                         double last_throughput,
                                         Configuration honest) {
  const double ref = strategy.reference_rate;
  AdaptiveMode next = current;
  if (current == AdaptiveMode::kSelfish && last_throughput < ref)
    next = AdaptiveMode::kHonest;
  else if (current == AdaptiveMode::kHonest &&
           last_throughput > strategy.hysteresis_low * ref)
    next = AdaptiveMode::kSelfish;
  AdaptiveDecision d;
  d.mode = next;
  d.config = next == AdaptiveMode::kSelfish
                 ? selfish_configuration(strategy, honest)
                 : honest;
  return d;
}

namespace {
std::vector<double> dedupe(std::vector<double> v) {
  std::set<double> seen;
  std::vector<double> out;
  for (double x : v)
    if (seen.insert(x).second) out.push_back(x);
  return out;
}
}  // namespace

std::vector<Strategy> fixed_attack_grid(std::vector<double> p_grid,
                                        std::vector<double> threshold_grid) {
  if (p_grid.empty() || threshold_grid.empty())
    throw std::invalid_argument("attack grid axes must be nonempty");
  p_grid = dedupe(std::move(p_grid));
  threshold_grid = dedupe(std::move(threshold_grid));
  std::vector<Strategy> out;
  out.reserve(p_grid.size() * threshold_grid.size());
  for (double p : p_grid) {
    for (double thr : threshold_grid) {
      Strategy s;
      s.kind = StrategyKind::kFixed;
      s.fixed_p = p;
      s.fixed_threshold = thr;
      s.validate();
      out.push_back(s);
    }
  }
  return out;
}

std::vector<double> default_p_grid() {
  std::vector<double> grid;
  for (int k = 1; k <= 20; ++k) grid.push_back(k / 20.0);
  return grid;
}

std::vector<double> default_threshold_scales() {
  std::vector<double> grid;
  for (int k = 0; k <= 8; ++k) grid.push_back(k / 4.0);
  return grid;
}

NetworkView observe(const sim::IntervalReport& report,
                    std::span<const std::size_t> active,
                    std::span<const double> holds, double interval_length) {
  NetworkView view;
  view.active.assign(active.begin(), active.end());
  view.interval_length = interval_length;
  for (std::size_t id : active) {
    view.t.push_back(id < report.stations() ? report.t[id] : 0.0);
    view.holds.push_back(holds[id]);
  }
  const int n = view.N();
  if (n == 0) return view;
  view.t_star = interval_length / n;
  if (n >= 2) {
    const auto pmin = analytic::solve_pmin_from_holds(view.holds, interval_length);
    view.p_min = pmin.p;
    view.delta = pmin.delta;
  } else {
    view.p_min = {1.0};
  }
  view.p_star = analytic::solve_optimal_p_from_holds(view.holds);
  return view;
}

void HoldTracker::record(const sim::IntervalReport& report) {
  if (entries_.size() < report.stations()) entries_.resize(report.stations());
  for (std::size_t i = 0; i < report.stations(); ++i) {
    if (report.n[i] == 0) continue;
    auto& s = entries_[i].samples;
    s.emplace_back(report.hold[i], report.n[i]);
    while (s.size() > window_) s.pop_front();
  }
}

double HoldTracker::estimate(std::size_t station) const {
  if (station >= entries_.size() || entries_[station].samples.empty())
    return fallback_;
  double hold = 0.0;
  std::int64_t n = 0;
  for (const auto& [h, k] : entries_[station].samples) {
    hold += h;
    n += k;
  }
  return hold / static_cast<double>(n);
}

void HoldTracker::reset(std::size_t station) {
  if (station < entries_.size()) entries_[station].samples.clear();
}

DocPolicy::DocPolicy(ControllerConfig config, double hold_time,
                     double threshold, double initial_p)
    : config_(config),
      hold_time_(hold_time),
      threshold_(threshold),
      p_(initial_p) {
  state_.P_initial = control::probability_to_control(initial_p, hold_time);
  state_.P = state_.P_initial;
  state_.P_max =
      control::probability_to_control(control::kMaxAccessProbability, hold_time);
  if (state_.P_initial > state_.P_max)
    throw std::invalid_argument("initial access probability above the ceiling");
}

control::Gains DocPolicy::gains_for(const NetworkView& view) const {
  control::Gains g;
  if (config_.gain_mode == GainMode::kManual) {
    g.Kp = config_.Kp;
    g.Ki = config_.Ki;
  } else {
    double P_sum = 0.0;
    if (config_.kh_estimate == KhEstimate::kOperatingPoint) {
      for (std::size_t j = 0; j < view.active.size(); ++j)
        P_sum += control::probability_to_control(view.p_star[j], view.holds[j]);
    } else {
      const double floor = control::probability_to_control(0.01, hold_time_);
      P_sum = view.N() * std::max(state_.P, floor);
    }
    g = control::tune_gains(
        view.N(), control::estimate_KH(P_sum, view.interval_length));
  }
  g.Kp *= config_.gain_scale;
  g.Ki *= config_.gain_scale;
  return g;
}

DocPolicy::Step DocPolicy::update(const NetworkView& view,
                                  std::size_t position) {
  Step step{p_, state_.P, 0.0, 0.0};
  if (view.N() < 2) return step;
  control::PunishmentParams pp;
  pp.N = view.N();
  pp.t_star = view.t_star;
  pp.p_min = view.p_min[position];
  pp.delta = view.delta;
  step.F = config_.punishment_scale * control::punishment_F(view.t, p_, pp);
  step.E = control::error_signal(view.t, position, p_, pp,
                                 config_.punishment_scale);
  state_ = control::retune(state_, gains_for(view));
  state_ = control::pi_update(state_, step.E);
  p_ = control::control_to_probability(state_.P, hold_time_);
  step.p = p_;
  step.P = state_.P;
  return step;
}

}  // namespace docsim::strategies
