#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/expint.hpp>

#include "doctest.h"
#include "docsim/channel.hpp"

using namespace docsim;
using namespace docsim::channel;

namespace {

constexpr double kW = 1e7;

// E[(R - x)^+] for R = W log2(1 + rho X), X ~ Exp(1):
// (W / ln 2) e^{1/rho} E1(2^{x/W} / rho).
double excess_closed_form(double x, double rho) {
  return kW / std::numbers::ln2 * std::exp(1.0 / rho) *
         boost::math::expint(1, std::exp2(x / kW) / rho);
}

double tail_closed_form(double x, double rho) {
  return std::exp(-(std::exp2(x / kW) - 1.0) / rho);
}

struct Moments {
  double mean = 0.0;
  double se = 0.0;
};

template <typename F>
Moments monte_carlo(int n, F&& draw) {
  double s = 0.0, ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw();
    s += x;
    ss += x * x;
  }
  Moments m;
  m.mean = s / n;
  m.se = std::sqrt(std::max(0.0, ss / n - m.mean * m.mean) / n);
  return m;
}

}  // namespace

TEST_CASE("iid Rayleigh tail matches the closed form and Monte-Carlo") {
  const auto model = RateModel::iid_rayleigh(kW, 1.0);
  CHECK(tail_prob(model, 0.0) == doctest::Approx(1.0));
  CHECK(tail_prob(model, kW) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  ChannelSampler sampler(model, make_stream(7, 0, 0, StreamPurpose::kChannel));
  const auto mc = monte_carlo(1'000'000, [&] { return sampler.sample(0) >= kW; });
  CHECK(std::abs(mc.mean - std::exp(-1.0)) < 3.0 * mc.se);

  for (double x : {0.3 * kW, 2.0 * kW, 4.5 * kW})
    CHECK(tail_prob(model, x) == doctest::Approx(tail_closed_form(x, 1.0)).epsilon(1e-12));
}

TEST_CASE("censored mean") {
  const auto model = RateModel::iid_rayleigh(kW, 1.0);
  SUBCASE("threshold zero is the full mean") {
    const double mean = excess_closed_form(0.0, 1.0);
    CHECK(censored_mean(model, 0.0) == doctest::Approx(mean).epsilon(1e-8));
    CHECK(mean_rate(model) == doctest::Approx(mean).epsilon(1e-8));
  }
  SUBCASE("far threshold gives nothing") {
    CHECK(censored_mean(model, 200.0 * kW) < 1e-12 * kW);
  }
  SUBCASE("threshold W against Monte-Carlo") {
    ChannelSampler sampler(model, make_stream(11, 0, 0, StreamPurpose::kChannel));
    const auto mc = monte_carlo(1'000'000, [&] {
      const double r = sampler.sample(0);
      return r >= kW ? r : 0.0;
    });
    CHECK(std::abs(censored_mean(model, kW) - mc.mean) < 3.0 * mc.se);
  }
}

TEST_CASE("excess mean") {
  SUBCASE("closed form through the exponential integral") {
    for (double rho : {1.0, 4.0, 10.0}) {
      const auto model = RateModel::iid_rayleigh(kW, rho);
      for (double x : {0.0, 0.5 * kW, kW, 3.0 * kW})
        CHECK(excess_mean(model, x) ==
              doctest::Approx(excess_closed_form(x, rho)).epsilon(1e-8));
    }
  }
  SUBCASE("identity with censored mean and tail") {
    const auto model = RateModel::iid_rayleigh(kW, 1.0);
    for (double x : {0.1 * kW, kW, 2.5 * kW}) {
      const double lhs = excess_mean(model, x);
      const double rhs = censored_mean(model, x) - x * tail_prob(model, x);
      CHECK(std::abs(lhs - rhs) <= 1e-9 * std::abs(rhs) + 1e-9);
    }
    CHECK(excess_mean(model, kW) ==
          doctest::Approx(censored_mean(model, kW) - kW * std::exp(-1.0)).epsilon(1e-9));
  }
  SUBCASE("nonincreasing on a grid") {
    const auto model = RateModel::iid_rayleigh(kW, 4.0);
    double prev = excess_mean(model, 0.0);
    for (int k = 1; k < 100; ++k) {
      const double v = excess_mean(model, k * 0.08 * kW);
      CHECK(v <= prev);
      prev = v;
    }
  }
  SUBCASE("deterministic channel") {
    const auto model = RateModel::constant(5e6);
    CHECK(excess_mean(model, 0.0) == doctest::Approx(5e6));
    CHECK(excess_mean(model, 2e6) == doctest::Approx(3e6));
    CHECK(excess_mean(model, 6e6) == 0.0);
  }
}

TEST_CASE("discrete rate mapping") {
  const auto table = default_rate_table();
  REQUIRE(table.size() == 7);
  CHECK(floor_to_table(table, 30e6) == 24e6);
  CHECK(floor_to_table(table, 0.4e6) == 0.0);
  CHECK(floor_to_table(table, 54e6) == 48e6);
  CHECK(floor_to_table(table, 60e6) == 54e6);

  const auto model = RateModel::discrete_mapped(kW, 1.0, table);
  // |h|^2 = 7 gives a Shannon rate of exactly 3 W = 30 Mbps.
  CHECK(shannon_rate(model, 7.0) == doctest::Approx(30e6));
  CHECK(floor_to_table(table, shannon_rate(model, 7.0)) == 24e6);

  SUBCASE("tail at 5.5 Mbps is the mass of Shannon rates above 5.5 Mbps") {
    CHECK(tail_prob(model, 5.5e6) ==
          doctest::Approx(tail_closed_form(5.5e6, 1.0)).epsilon(1e-12));
    const auto masses = discrete_bin_masses(model);
    double above = 0.0;
    for (std::size_t i = 0; i < table.size(); ++i)
      if (table[i] >= 5.5e6) above += masses[i];
    CHECK(tail_prob(model, 5.5e6) == doctest::Approx(above).epsilon(1e-12));
  }

  SUBCASE("sampled frequencies match bin masses") {
    const auto masses = discrete_bin_masses(model);
    REQUIRE(masses.size() == table.size() + 1);
    double total = 0.0;
    for (double m : masses) total += m;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    ChannelSampler sampler(model, make_stream(3, 0, 0, StreamPurpose::kChannel));
    const int n = 400'000;
    std::vector<int> counts(masses.size(), 0);
    for (int i = 0; i < n; ++i) {
      const double r = sampler.sample(0);
      if (r == 0.0) {
        counts.back()++;
        continue;
      }
      std::size_t idx = 0;
      while (idx < table.size() && table[idx] != r) ++idx;
      REQUIRE(idx < table.size());
      counts[idx]++;
    }
    for (std::size_t i = 0; i < masses.size(); ++i) {
      const double freq = static_cast<double>(counts[i]) / n;
      const double se = std::sqrt(masses[i] * (1.0 - masses[i]) / n);
      CHECK(std::abs(freq - masses[i]) <= 3.0 * se + 1e-12);
    }
  }
}

TEST_CASE("Jakes gain autocorrelation follows J0") {
  const double fd = 2.0 * std::numbers::pi / 100.0;
  Rng rng = make_stream(5, 0, 0, StreamPurpose::kJakesPhases);
  JakesProcess proc(fd, rng);
  const int steps = 1'000'000;
  const int max_lag = static_cast<int>(std::numbers::pi / fd);
  std::vector<double> re(steps), im(steps);
  double power = 0.0;
  for (int t = 0; t < steps; ++t) {
    const auto h = proc.gain(t);
    re[t] = h[0];
    im[t] = h[1];
    power += h[0] * h[0] + h[1] * h[1];
  }
  power /= steps;
  CHECK(power == doctest::Approx(1.0).epsilon(0.05));
  for (int k = 0; k <= max_lag; k += 5) {
    double acc = 0.0;
    for (int t = 0; t + k < steps; ++t) acc += re[t] * re[t + k] + im[t] * im[t + k];
    acc /= (steps - k) * power;
    CHECK(std::abs(acc - boost::math::cyl_bessel_j(0, fd * k)) < 0.05);
  }
}

TEST_CASE("Jakes marginal is Rayleigh") {
  const auto model = RateModel::jakes_rayleigh(kW, 1.0, 2.0 * std::numbers::pi / 100.0);
  CHECK(tail_prob(model, kW) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  double above = 0.0;
  const int n = 200;
  // Average over many independent processes sampled at one instant.
  for (int s = 0; s < 2000; ++s) {
    ChannelSampler sampler(model, make_stream(100 + s, 0, 0, StreamPurpose::kChannel));
    for (int i = 0; i < n; ++i) above += sampler.sample(i * 1000.0) >= kW;
  }
  const double freq = above / (2000.0 * n);
  CHECK(freq == doctest::Approx(std::exp(-1.0)).epsilon(0.02));
}

TEST_CASE("invalid models are rejected") {
  CHECK_THROWS(RateModel::iid_rayleigh(-1.0, 1.0).validate());
  CHECK_THROWS(RateModel::iid_rayleigh(kW, 0.0).validate());
  CHECK_THROWS(RateModel::discrete_mapped(kW, 1.0, {2e6, 1e6}).validate());
  CHECK_THROWS(channel_kind_from_string("rician"));
  CHECK(channel_kind_from_string("jakes-rayleigh") == ChannelKind::kJakesRayleigh);
}

TEST_CASE("sampling is deterministic per stream") {
  const auto model = RateModel::iid_rayleigh(kW, 2.0);
  ChannelSampler a(model, make_stream(9, 1, 2, StreamPurpose::kChannel));
  ChannelSampler b(model, make_stream(9, 1, 2, StreamPurpose::kChannel));
  ChannelSampler c(model, make_stream(9, 2, 2, StreamPurpose::kChannel));
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.sample(i);
    CHECK(x == b.sample(i));
    differs |= x != c.sample(i);
  }
  CHECK(differs);
}
