#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "docsim/analytic.hpp"
#include "docsim/episode.hpp"
#include "docsim/sim.hpp"

using namespace docsim;
using namespace docsim::sim;

namespace {

NetworkParams homogeneous(int N, double rho = 1.0) {
  NetworkParams params;
  params.models.assign(N, channel::RateModel::iid_rayleigh(1e7, rho));
  return params;
}

void check_conservation(const IntervalReport& r, std::int64_t length, int tx) {
  CHECK(r.idle_slots + r.collision_slots + r.busy_slots() == r.elapsed);
  CHECK(r.elapsed >= length);
  CHECK(r.elapsed < length + tx + 1);
  double t_sum = 0.0, hold_sum = 0.0;
  std::int64_t n_sum = 0;
  for (std::size_t i = 0; i < r.stations(); ++i) {
    t_sum += r.t[i];
    hold_sum += r.hold[i];
    n_sum += r.n[i];
    CHECK(r.transmissions[i] <= r.n[i]);
  }
  CHECK(n_sum == r.success_slots);
  CHECK(t_sum == doctest::Approx(hold_sum + n_sum * kAccessOverhead));
}

}  // namespace

TEST_CASE("single slot outcomes") {
  const auto params = homogeneous(3);
  ContentionContext ctx(params.models, 10, 1, 0);
  const std::vector<double> thr(3, 0.0);
  SUBCASE("nobody contends") {
    const auto out = run_slot(std::vector<double>{0, 0, 0}, thr, ctx);
    CHECK(out.kind == SlotKind::kIdle);
    CHECK(out.duration == 1);
    CHECK(ctx.now() == 1);
  }
  SUBCASE("two certain contenders collide") {
    const auto out = run_slot(std::vector<double>{1, 1, 0}, thr, ctx);
    CHECK(out.kind == SlotKind::kCollision);
    CHECK(out.duration == 1);
  }
  SUBCASE("a lone contender with threshold zero transmits") {
    const auto out = run_slot(std::vector<double>{0, 1, 0}, thr, ctx);
    CHECK(out.kind == SlotKind::kSuccess);
    CHECK(out.winner == 1);
    CHECK(out.transmitted);
    CHECK(out.duration == 11);
    CHECK(ctx.now() == 11);
  }
  SUBCASE("an unreachable threshold releases the channel") {
    const std::vector<double> high(3, 1e12);
    const auto out = run_slot(std::vector<double>{1, 0, 0}, high, ctx);
    CHECK(out.kind == SlotKind::kSuccess);
    CHECK_FALSE(out.transmitted);
    CHECK(out.duration == 1);
    CHECK(out.rate == 0.0);
  }
}

TEST_CASE("lone station on a constant channel") {
  const double c = 6e6;
  const std::vector<channel::RateModel> models{channel::RateModel::constant(c)};
  for (auto engine : {Engine::kPerSlot, Engine::kAggregated}) {
    ContentionContext ctx(models, 10, 3, 0);
    const auto r = run_interval(std::vector<double>{1.0}, std::vector<double>{0.0},
                                100000, ctx, engine);
    const std::int64_t successes = (100000 + 10) / 11;  // ceil(1e5 / 11)
    CHECK(r.n[0] == successes);
    CHECK(r.bits[0] == doctest::Approx(c * 10 * successes));
    CHECK(r.elapsed == 11 * successes);
    CHECK(r.idle_slots == 0);
    CHECK(r.collision_slots == 0);
  }
}

TEST_CASE("time conservation") {
  const auto params = homogeneous(10);
  const auto cfg = analytic::optimal_configuration(params);
  for (auto engine : {Engine::kPerSlot, Engine::kAggregated}) {
    ContentionContext ctx(params.models, 10, 17, 0);
    for (int k = 0; k < 5; ++k) {
      const auto r = run_interval(cfg.p, cfg.thresholds, 100000, ctx, engine);
      check_conservation(r, 100000, 10);
    }
    CHECK(ctx.now() >= 5 * 100000);
  }
  SUBCASE("heavy contention") {
    ContentionContext ctx(params.models, 10, 18, 0);
    const std::vector<double> p(10, 0.6);
    check_conservation(run_interval(p, cfg.thresholds, 20000, ctx), 20000, 10);
  }
}

TEST_CASE("homogeneous stations share channel time") {
  const auto params = homogeneous(10);
  const auto cfg = analytic::optimal_configuration(params);
  ContentionContext ctx(params.models, 10, 23, 0);
  std::vector<double> t(10, 0.0);
  double elapsed = 0.0;
  for (int k = 0; k < 100; ++k) {
    const auto r = run_interval(cfg.p, cfg.thresholds, 100000, ctx);
    for (int i = 0; i < 10; ++i) t[i] += r.t[i];
    elapsed += static_cast<double>(r.elapsed);
  }
  const double mean = std::accumulate(t.begin(), t.end(), 0.0) / 10;
  for (double x : t) CHECK(std::abs(x - mean) / mean < 0.02);
}

TEST_CASE("same seed, same trajectory") {
  const auto params = homogeneous(4, 2.0);
  const std::vector<double> p{0.1, 0.2, 0.3, 0.15};
  const std::vector<double> thr(4, 5e6);
  for (auto engine : {Engine::kPerSlot, Engine::kAggregated}) {
    ContentionContext a(params.models, 10, 99, 2), b(params.models, 10, 99, 2);
    for (int k = 0; k < 3; ++k) {
      const auto ra = run_interval(p, thr, 30000, a, engine);
      const auto rb = run_interval(p, thr, 30000, b, engine);
      CHECK(ra.bits == rb.bits);
      CHECK(ra.t == rb.t);
      CHECK(ra.idle_slots == rb.idle_slots);
    }
  }
}

TEST_CASE("empirical rates match the analytic model") {
  NetworkParams params;
  for (double rho : {1.0, 4.0, 10.0}) params.models.push_back(channel::RateModel::iid_rayleigh(1e7, rho));
  const auto cfg = analytic::optimal_configuration(params);
  const auto ps_i = analytic::success_probabilities(cfg.p);
  const double ps = std::accumulate(ps_i.begin(), ps_i.end(), 0.0);

  for (auto engine : {Engine::kPerSlot, Engine::kAggregated}) {
    CAPTURE(static_cast<int>(engine));
    ContentionContext ctx(params.models, 10, 31, 0);
    std::int64_t contention_slots = 0, successes = 0;
    std::vector<double> hold(3, 0.0), bits(3, 0.0), hold_sq(3, 0.0);
    std::vector<std::int64_t> n(3, 0), tx(3, 0);
    for (int k = 0; k < 40; ++k) {
      const auto r = run_interval(cfg.p, cfg.thresholds, 100000, ctx, engine);
      contention_slots += r.idle_slots + r.collision_slots + r.success_slots;
      successes += r.success_slots;
      for (int i = 0; i < 3; ++i) {
        hold[i] += r.hold[i];
        bits[i] += r.bits[i];
        n[i] += r.n[i];
        tx[i] += r.transmissions[i];
      }
    }
    const double ps_hat = static_cast<double>(successes) / contention_slots;
    const double ps_se = std::sqrt(ps * (1 - ps) / contention_slots);
    CHECK(std::abs(ps_hat - ps) < 3.0 * ps_se);
    for (int i = 0; i < 3; ++i) {
      const auto& st = cfg.stats[i];
      const double q = (st.hold_time - 1.0) / 10.0;
      const double q_hat = static_cast<double>(tx[i]) / n[i];
      CHECK(std::abs(q_hat - q) < 3.0 * std::sqrt(q * (1 - q) / n[i]));
      const double share_hat = static_cast<double>(n[i]) / successes;
      const double share = ps_i[i] / ps;
      CHECK(std::abs(share_hat - share) < 3.0 * std::sqrt(share * (1 - share) / successes));
      // Bits per success: mean of a censored rate, compare with a loose
      // bound from the second moment of a Rayleigh rate.
      const double per = bits[i] / n[i];
      CHECK(per == doctest::Approx(st.bits_per_success).epsilon(0.02));
    }
  }
}

TEST_CASE("engines agree on throughput") {
  const auto params = homogeneous(5, 4.0);
  const auto cfg = analytic::optimal_configuration(params);
  std::vector<std::vector<IntervalReport>> slot(4), agg(4);
  for (int rep = 0; rep < 4; ++rep) {
    ContentionContext a(params.models, 10, 7, rep), b(params.models, 10, 7, rep);
    for (int k = 0; k < 20; ++k) {
      slot[rep].push_back(run_interval(cfg.p, cfg.thresholds, 100000, a, Engine::kPerSlot));
      agg[rep].push_back(run_interval(cfg.p, cfg.thresholds, 100000, b, Engine::kAggregated));
    }
  }
  const auto es = measure_throughput(slot);
  const auto ea = measure_throughput(agg);
  for (int i = 0; i < 5; ++i) {
    const double tol = 2.0 * (es.half_width[i] + ea.half_width[i]);
    CHECK(std::abs(es.mean_bps[i] - ea.mean_bps[i]) <= tol);
  }
}

TEST_CASE("simulated throughput matches the analytic allocation") {
  NetworkParams params;
  for (int i = 0; i < 6; ++i)
    params.models.push_back(channel::RateModel::iid_rayleigh(1e7, i < 3 ? 1.0 : 7.0));
  const auto cfg = analytic::optimal_configuration(params);
  std::vector<std::vector<IntervalReport>> reps(8);
  for (int rep = 0; rep < 8; ++rep) {
    ContentionContext ctx(params.models, 10, 41, rep);
    for (int k = 0; k < 30; ++k)
      reps[rep].push_back(run_interval(cfg.p, cfg.thresholds, 100000, ctx));
  }
  const auto est = measure_throughput(reps);
  for (int i = 0; i < 6; ++i) {
    CAPTURE(i);
    // The interval boundary wastes at most one partial transmission.
    CHECK(std::abs(est.mean_bps[i] - cfg.allocation.r[i]) <=
          1.5 * est.half_width[i] + 1e-3 * cfg.allocation.r[i]);
  }
}

TEST_CASE("confidence intervals") {
  SUBCASE("empty") { CHECK(mean_ci(std::vector<double>{}).ci_free); }
  SUBCASE("single sample") {
    const auto ci = mean_ci(std::vector<double>{4.0});
    CHECK(ci.ci_free);
    CHECK(ci.mean == 4.0);
    CHECK(ci.half_width == 0.0);
  }
  SUBCASE("two samples use t with one degree of freedom") {
    const auto ci = mean_ci(std::vector<double>{1.0, 3.0});
    CHECK(ci.mean == 2.0);
    // sd = sqrt(2), t_{0.975,1} = 12.7062
    CHECK(ci.half_width == doctest::Approx(12.7062047 * std::sqrt(2.0) / std::sqrt(2.0)).epsilon(1e-6));
  }
  SUBCASE("five samples") {
    const auto ci = mean_ci(std::vector<double>{2, 4, 4, 5, 5});
    CHECK(ci.mean == 4.0);
    const double sd = std::sqrt(6.0 / 4.0);
    CHECK(ci.half_width == doctest::Approx(2.7764451 * sd / std::sqrt(5.0)).epsilon(1e-6));
  }
  SUBCASE("constant samples") {
    CHECK(mean_ci(std::vector<double>(7, 3.0)).half_width == 0.0);
  }
}

TEST_CASE("an episode of zero intervals") {
  EpisodeConfig cfg;
  for (int i = 0; i < 3; ++i) cfg.stations.push_back({channel::RateModel::iid_rayleigh(1e7, 1.0)});
  cfg.intervals = 0;
  const auto res = run_episode(cfg, 1);
  CHECK(res.reports.empty());
  CHECK(res.trace.empty());
  const auto thr = episode_throughput(res, 0);
  for (double x : thr) CHECK(x == 0.0);
}
