#include "docsim/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/students_t.hpp>

namespace docsim::sim {

IntervalReport::IntervalReport(std::size_t stations)
    : t(stations, 0.0),
      n(stations, 0),
      transmissions(stations, 0),
      bits(stations, 0.0),
      hold(stations, 0.0) {}

std::int64_t IntervalReport::busy_slots() const {
  return static_cast<std::int64_t>(
      std::llround(std::accumulate(hold.begin(), hold.end(), 0.0)));
}

double IntervalReport::throughput_bps(std::size_t station) const {
  return elapsed > 0 ? bits[station] / static_cast<double>(elapsed) : 0.0;
}

double IntervalReport::mean_hold(std::size_t station, double fallback) const {
  return n[station] > 0 ? hold[station] / static_cast<double>(n[station])
                        : fallback;
}

ContentionContext::ContentionContext(
    std::span<const channel::RateModel> models, int tx_slots,
    std::uint64_t seed, std::uint64_t replication)
    : tx_slots_(tx_slots),
      seed_(seed),
      replication_(replication),
      network_rng_(make_stream(seed, replication, -1,
                               StreamPurpose::kContention)) {
  for (const auto& m : models) add_station(m);
}

std::size_t ContentionContext::add_station(const channel::RateModel& model) {
  const auto id = static_cast<std::int64_t>(channels_.size());
  channels_.emplace_back(
      model, make_stream(seed_, replication_, id, StreamPurpose::kChannel));
  station_rngs_.push_back(
      make_stream(seed_, replication_, id, StreamPurpose::kContention));
  return static_cast<std::size_t>(id);
}

namespace {

// Records one success of `winner` observed at the current clock.
int resolve_success(std::size_t winner, double threshold,
                    ContentionContext& ctx, IntervalReport& report,
                    double* rate_out = nullptr, bool* transmitted_out = nullptr) {
  const double rate =
      ctx.channel(winner).sample(static_cast<double>(ctx.now()));
  const bool transmit = rate >= threshold;
  const int hold = transmit ? ctx.tx_slots() + 1 : 1;
  report.n[winner] += 1;
  report.hold[winner] += hold;
  report.t[winner] += hold + kAccessOverhead;
  if (transmit) {
    report.transmissions[winner] += 1;
    report.bits[winner] += rate * ctx.tx_slots();
  }
  report.success_slots += 1;
  if (rate_out) *rate_out = rate;
  if (transmitted_out) *transmitted_out = transmit;
  return hold;
}

IntervalReport run_interval_per_slot(std::span<const double> p,
                                     std::span<const double> thresholds,
                                     std::int64_t interval_slots,
                                     ContentionContext& ctx) {
  IntervalReport report(p.size());
  while (report.elapsed < interval_slots) {
    const SlotOutcome out = run_slot(p, thresholds, ctx);
    switch (out.kind) {
      case SlotKind::kIdle:
        report.idle_slots += 1;
        break;
      case SlotKind::kCollision:
        report.collision_slots += 1;
        break;
      case SlotKind::kSuccess: {
        const auto w = static_cast<std::size_t>(out.winner);
        report.n[w] += 1;
        report.hold[w] += out.duration;
        report.t[w] += out.duration + kAccessOverhead;
        report.success_slots += 1;
        if (out.transmitted) {
          report.transmissions[w] += 1;
          report.bits[w] += out.rate * ctx.tx_slots();
        }
        break;
      }
    }
    report.elapsed += out.duration;
  }
  return report;
}

IntervalReport run_interval_aggregated(std::span<const double> p,
                                       std::span<const double> thresholds,
                                       std::int64_t interval_slots,
                                       ContentionContext& ctx) {
  IntervalReport report(p.size());
  const auto ps_i = analytic::success_probabilities(p);
  const double ps = std::accumulate(ps_i.begin(), ps_i.end(), 0.0);
  double idle = 1.0;
  for (double pi : p) idle *= 1.0 - pi;
  const double failure = std::max(0.0, 1.0 - ps);

  Rng& rng = ctx.network_rng();
  std::int64_t failures = 0;
  if (ps > 0.0) {
    std::discrete_distribution<std::size_t> pick(ps_i.begin(), ps_i.end());
    const bool always = ps >= 1.0;
    std::geometric_distribution<std::int64_t> gap(always ? 0.5 : ps);
    while (report.elapsed < interval_slots) {
      const std::int64_t remaining = interval_slots - report.elapsed;
      const std::int64_t g = always ? 0 : gap(rng);
      if (g >= remaining) {
        failures += remaining;
        report.elapsed += remaining;
        ctx.advance(remaining);
        break;
      }
      failures += g;
      report.elapsed += g;
      ctx.advance(g);
      const std::size_t w = pick(rng);
      const int hold = resolve_success(w, thresholds[w], ctx, report);
      report.elapsed += hold;
      ctx.advance(hold);
    }
  } else {
    failures = interval_slots;
    report.elapsed = interval_slots;
    ctx.advance(interval_slots);
  }

  if (failures > 0 && failure > 0.0) {
    const double idle_share = std::clamp(idle / failure, 0.0, 1.0);
    report.idle_slots =
        std::binomial_distribution<std::int64_t>(failures, idle_share)(rng);
  }
  report.collision_slots = failures - report.idle_slots;
  return report;
}

}  // namespace

SlotOutcome run_slot(std::span<const double> p,
                     std::span<const double> thresholds,
                     ContentionContext& ctx) {
  int contenders = 0;
  int winner = -1;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    if (p[i] >= 1.0 || uniform01(ctx.station_rng(i)) < p[i]) {
      ++contenders;
      winner = static_cast<int>(i);
    }
  }
  SlotOutcome out;
  if (contenders != 1) {
    out.kind = contenders == 0 ? SlotKind::kIdle : SlotKind::kCollision;
    out.duration = 1;
    ctx.advance(1);
    return out;
  }
  const auto w = static_cast<std::size_t>(winner);
  out.kind = SlotKind::kSuccess;
  out.winner = winner;
  out.rate = ctx.channel(w).sample(static_cast<double>(ctx.now()));
  out.transmitted = out.rate >= thresholds[w];
  out.duration = out.transmitted ? ctx.tx_slots() + 1 : 1;
  if (!out.transmitted) out.rate = 0.0;
  ctx.advance(out.duration);
  return out;
}

IntervalReport run_interval(std::span<const double> p,
                            std::span<const double> thresholds,
                            std::int64_t interval_slots, ContentionContext& ctx,
                            Engine engine) {
  if (p.size() != thresholds.size() || p.size() > ctx.stations())
    throw std::invalid_argument("run_interval: station vectors do not match");
  return engine == Engine::kPerSlot
             ? run_interval_per_slot(p, thresholds, interval_slots, ctx)
             : run_interval_aggregated(p, thresholds, interval_slots, ctx);
}

MeanCI mean_ci(std::span<const double> samples) {
  MeanCI out;
  const auto n = samples.size();
  if (n == 0) {
    out.ci_free = true;
    return out;
  }
  out.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
  if (n < 2) {
    out.ci_free = true;
    return out;
  }
  double ss = 0.0;
  for (double x : samples) ss += (x - out.mean) * (x - out.mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  boost::math::students_t dist(static_cast<double>(n - 1));
  const double tq = boost::math::quantile(boost::math::complement(dist, 0.025));
  out.half_width = tq * sd / std::sqrt(static_cast<double>(n));
  return out;
}

std::vector<double> window_throughput(std::span<const IntervalReport> reports,
                                      std::size_t first_interval) {
  if (reports.empty()) return {};
  std::size_t stations = 0;
  for (const auto& r : reports) stations = std::max(stations, r.stations());
  std::vector<double> bits(stations, 0.0);
  double elapsed = 0.0;
  for (std::size_t k = first_interval; k < reports.size(); ++k) {
    for (std::size_t i = 0; i < reports[k].stations(); ++i)
      bits[i] += reports[k].bits[i];
    elapsed += static_cast<double>(reports[k].elapsed);
  }
  for (double& b : bits) b = elapsed > 0.0 ? b / elapsed : 0.0;
  return bits;
}

ThroughputEstimate measure_throughput(
    std::span<const std::vector<IntervalReport>> replications,
    std::size_t first_interval) {
  ThroughputEstimate est;
  std::vector<std::vector<double>> per_rep;
  std::size_t stations = 0;
  for (const auto& rep : replications) {
    per_rep.push_back(window_throughput(rep, first_interval));
    stations = std::max(stations, per_rep.back().size());
  }
  est.mean_bps.assign(stations, 0.0);
  est.half_width.assign(stations, 0.0);
  est.ci_free = replications.size() < 2;
  std::vector<double> column;
  for (std::size_t i = 0; i < stations; ++i) {
    column.clear();
    for (const auto& r : per_rep) column.push_back(i < r.size() ? r[i] : 0.0);
    const auto ci = mean_ci(column);
    est.mean_bps[i] = ci.mean;
    est.half_width[i] = ci.half_width;
  }
  return est;
}

}  // namespace docsim::sim
