#include "docsim/episode.hpp"

#include <cmath>
#include <deque>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace docsim {

NetworkParams EpisodeConfig::network() const {
  NetworkParams params;
  params.tx_slots = tx_slots;
  params.interval_slots = interval_slots;
  for (const auto& s : stations) params.models.push_back(s.model);
  return params;
}

void EpisodeConfig::validate() const {
  if (stations.empty()) throw std::invalid_argument("episode has no stations");
  if (intervals < 0) throw std::invalid_argument("intervals must be >= 0");
  if (throughput_window == 0 || hold_window == 0)
    throw std::invalid_argument("estimation windows must be positive");
  network().validate();
  for (const auto& s : stations) {
    s.strategy.validate();
    if (s.join_interval < 0 || s.leave_interval <= s.join_interval)
      throw std::invalid_argument("station leaves before it joins");
    if (!std::isnan(s.initial_p) && !(s.initial_p > 0.0 && s.initial_p < 1.0))
      throw std::invalid_argument("initial_p must lie in (0, 1)");
  }
}

namespace {

struct StationRuntime {
  const StationSetup* setup = nullptr;
  double threshold = 0.0;  // honest threshold
  double hold = 0.0;       // analytic hold at the honest threshold
  std::optional<strategies::DocPolicy> policy;
  strategies::AdaptiveMode mode = strategies::AdaptiveMode::kSelfish;
  std::deque<double> recent_rate;
  bool active = false;

  bool selfish_at(std::int64_t k) const {
    return setup->strategy.kind != strategies::StrategyKind::kDoc &&
           k >= setup->selfish_from;
  }
};

std::vector<double> optimal_p_for(const std::vector<StationRuntime>& st,
                                  const std::vector<std::size_t>& ids) {
  std::vector<analytic::StationStats> stats;
  for (auto id : ids) {
    analytic::StationStats s;
    s.hold_time = st[id].hold;
    stats.push_back(s);
  }
  return analytic::solve_optimal_p(stats);
}

}  // namespace

EpisodeResult run_episode(const EpisodeConfig& config, std::uint64_t seed,
                          std::uint64_t replication) {
  config.validate();
  const NetworkParams params = config.network();
  const std::size_t n = config.stations.size();
  const double T_total = params.interval_length();

  EpisodeResult result;
  result.interval_length = T_total;
  std::vector<StationRuntime> st(n);
  for (std::size_t i = 0; i < n; ++i) {
    st[i].setup = &config.stations[i];
    st[i].threshold = analytic::solve_threshold(params.models[i], params);
    st[i].hold =
        analytic::station_stats(params.models[i], st[i].threshold, params)
            .hold_time;
    result.thresholds.push_back(st[i].threshold);
  }
  {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    result.optimal_p = optimal_p_for(st, all);
  }

  sim::ContentionContext ctx(params.models, config.tx_slots, seed, replication);
  strategies::HoldTracker holds(config.hold_window,
                                config.tx_slots * kMiniSlot + kMiniSlot);
  std::vector<std::size_t> active;
  std::vector<double> p_star_active;  // analytic p*, aligned with station ids
  std::vector<double> p(n, 0.0), thr(n, 0.0);
  std::vector<double> hold_est(n, 0.0);

  for (std::int64_t k = 0; k < config.intervals; ++k) {
    bool changed = k == 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool now_active = k >= st[i].setup->join_interval &&
                              k < st[i].setup->leave_interval;
      if (now_active != st[i].active) changed = true;
      if (now_active && !st[i].active) {
        st[i].policy.reset();
        st[i].recent_rate.clear();
        st[i].mode = strategies::AdaptiveMode::kSelfish;
        holds.reset(i);
      }
      st[i].active = now_active;
    }
    if (changed) {
      active.clear();
      for (std::size_t i = 0; i < n; ++i)
        if (st[i].active) active.push_back(i);
      p_star_active.assign(n, 0.0);
      if (!active.empty()) {
        const auto ps = optimal_p_for(st, active);
        for (std::size_t a = 0; a < active.size(); ++a)
          p_star_active[active[a]] = ps[a];
      }
    }
    for (auto id : active) {
      auto& s = st[id];
      if (!s.policy) {
        double p0 = s.setup->initial_p;
        if (std::isnan(p0)) p0 = p_star_active[id];
        s.policy.emplace(config.controller, s.hold, s.threshold, p0);
      }
    }

    std::fill(p.begin(), p.end(), 0.0);
    std::fill(thr.begin(), thr.end(), 0.0);
    for (auto id : active) {
      auto& s = st[id];
      const auto& strat = s.setup->strategy;
      if (!s.selfish_at(k)) {
        p[id] = s.policy->p();
        thr[id] = s.threshold;
        continue;
      }
      const strategies::Configuration honest{p_star_active[id], s.threshold};
      strategies::Configuration cfg;
      if (strategies::is_adaptive(strat.kind)) {
        if (!s.recent_rate.empty()) {
          const double mean =
              std::accumulate(s.recent_rate.begin(), s.recent_rate.end(), 0.0) /
              static_cast<double>(s.recent_rate.size());
          const auto d =
              strategies::adaptive_selfish_policy(strat, s.mode, mean, honest);
          s.mode = d.mode;
          cfg = d.config;
        } else {
          cfg = s.mode == strategies::AdaptiveMode::kSelfish
                    ? strategies::selfish_configuration(strat, honest)
                    : honest;
        }
      } else {
        cfg = strategies::selfish_configuration(strat, honest);
      }
      p[id] = cfg.p;
      thr[id] = cfg.threshold;
    }

    auto report = sim::run_interval(p, thr, config.interval_slots, ctx,
                                    config.engine);
    holds.record(report);
    for (auto id : active) {
      auto& q = st[id].recent_rate;
      q.push_back(report.throughput_bps(id));
      while (q.size() > config.throughput_window) q.pop_front();
      hold_est[id] = holds.estimate(id);
    }

    std::vector<strategies::DocPolicy::Step> steps(n);
    std::vector<bool> updated(n, false);
    if (active.size() >= 2) {
      const auto view =
          strategies::observe(report, active, hold_est, T_total);
      for (std::size_t a = 0; a < active.size(); ++a) {
        const auto id = active[a];
        if (st[id].selfish_at(k)) continue;
        steps[id] = st[id].policy->update(view, a);
        updated[id] = true;
      }
    }

    if (config.record_traces) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      for (auto id : active) {
        TraceRow row;
        row.interval = k;
        row.station = id;
        row.p = p[id];
        row.P = updated[id] ? steps[id].P : nan;
        row.E = updated[id] ? steps[id].E : nan;
        row.F = updated[id] ? steps[id].F : nan;
        if (!updated[id] && !st[id].selfish_at(k)) row.P = st[id].policy->state().P;
        row.t = report.t[id];
        row.bits = report.bits[id];
        row.successes = report.n[id];
        result.trace.push_back(row);
      }
    }
    result.p_history.push_back(p);
    result.reports.push_back(std::move(report));
  }
  return result;
}

std::vector<double> episode_throughput(const EpisodeResult& result,
                                       std::size_t first_interval) {
  return sim::window_throughput(result.reports, first_interval);
}

std::vector<double> mean_channel_time(const EpisodeResult& result,
                                      std::size_t first_interval) {
  if (result.reports.empty()) return {};
  std::vector<double> t(result.reports.front().stations(), 0.0);
  std::size_t count = 0;
  for (std::size_t k = first_interval; k < result.reports.size(); ++k, ++count)
    for (std::size_t i = 0; i < t.size(); ++i) t[i] += result.reports[k].t[i];
  if (count > 0)
    for (double& x : t) x /= static_cast<double>(count);
  return t;
}

}  // namespace docsim
