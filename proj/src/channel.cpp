#include "docsim/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace docsim::channel {

namespace {

// Integration window past the threshold, in units of W. The Shannon tail is
// exp(-(2^u - 1)/rho); at u = 40 it is zero in double precision for any
// rho below ~1e9.
constexpr double kWindowInBandwidths = 40.0;
constexpr double kQuadratureTolerance = 1e-8;
constexpr unsigned kQuadratureDepth = 20;

// P(S >= x) for the continuous Shannon rate S = W log2(1 + rho X), X ~ Exp(1).
double shannon_tail(double bandwidth, double rho, double x) {
  if (x <= 0.0) return 1.0;
  const double snr_needed = std::expm1(std::numbers::ln2 * x / bandwidth);
  return std::exp(-snr_needed / rho);
}

template <class F>
double integrate_window(F f, double lo, double hi) {
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 61>;
  return Integrator::integrate(f, lo, hi, kQuadratureDepth,
                               kQuadratureTolerance);
}

// E[(S - x)^+] = \int_x^inf P(S >= r) dr, computed in u = r / W.
double shannon_excess(double bandwidth, double rho, double x) {
  const double u0 = std::max(0.0, x) / bandwidth;
  auto tail = [rho](double u) {
    return std::exp(-std::expm1(std::numbers::ln2 * u) / rho);
  };
  return bandwidth * integrate_window(tail, u0, u0 + kWindowInBandwidths);
}

// E[S 1{S >= x}] = \int_x^inf r f_S(r) dr, computed in u = r / W.
double shannon_censored(double bandwidth, double rho, double x) {
  const double u0 = std::max(0.0, x) / bandwidth;
  auto weighted_pdf = [rho](double u) {
    const double growth = std::exp2(u);
    const double pdf =
        std::numbers::ln2 * growth / rho * std::exp(-(growth - 1.0) / rho);
    return u * pdf;
  };
  return bandwidth *
         integrate_window(weighted_pdf, u0, u0 + kWindowInBandwidths);
}

bool is_continuous_rayleigh(const RateModel& m) {
  return m.kind == ChannelKind::kIidRayleigh ||
         m.kind == ChannelKind::kJakesRayleigh;
}

}  // namespace

std::string to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::kIidRayleigh:
      return "iid-rayleigh";
    case ChannelKind::kJakesRayleigh:
      return "jakes-rayleigh";
    case ChannelKind::kDiscreteMapped:
      return "discrete-mapped";
    case ChannelKind::kConstant:
      return "constant";
  }
  return "unknown";
}

ChannelKind channel_kind_from_string(const std::string& name) {
  if (name == "iid-rayleigh") return ChannelKind::kIidRayleigh;
  if (name == "jakes-rayleigh") return ChannelKind::kJakesRayleigh;
  if (name == "discrete-mapped") return ChannelKind::kDiscreteMapped;
  if (name == "constant") return ChannelKind::kConstant;
  throw std::invalid_argument("unknown channel kind '" + name + "'");
}

RateModel RateModel::iid_rayleigh(double bandwidth, double rho) {
  RateModel m;
  m.kind = ChannelKind::kIidRayleigh;
  m.bandwidth = bandwidth;
  m.rho = rho;
  m.validate();
  return m;
}

RateModel RateModel::jakes_rayleigh(double bandwidth, double rho,
                                    double doppler) {
  RateModel m;
  m.kind = ChannelKind::kJakesRayleigh;
  m.bandwidth = bandwidth;
  m.rho = rho;
  m.doppler = doppler;
  m.validate();
  return m;
}

RateModel RateModel::discrete_mapped(double bandwidth, double rho,
                                     std::vector<double> rate_table) {
  RateModel m;
  m.kind = ChannelKind::kDiscreteMapped;
  m.bandwidth = bandwidth;
  m.rho = rho;
  m.rate_table = std::move(rate_table);
  m.validate();
  return m;
}

RateModel RateModel::constant(double rate) {
  RateModel m;
  m.kind = ChannelKind::kConstant;
  m.constant_rate = rate;
  m.validate();
  return m;
}

void RateModel::validate() const {
  if (kind == ChannelKind::kConstant) {
    if (!(constant_rate > 0.0) || !std::isfinite(constant_rate))
      throw std::invalid_argument("constant channel needs a positive rate");
    return;
  }
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
    throw std::invalid_argument("channel bandwidth W must be positive");
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw std::invalid_argument("channel rho must be positive");
  if (kind == ChannelKind::kJakesRayleigh &&
      (!(doppler > 0.0) || !std::isfinite(doppler)))
    throw std::invalid_argument("jakes channel needs a positive doppler");
  if (kind == ChannelKind::kDiscreteMapped) {
    if (rate_table.empty())
      throw std::invalid_argument("discrete channel needs a rate table");
    for (std::size_t k = 0; k < rate_table.size(); ++k) {
      if (!(rate_table[k] > 0.0))
        throw std::invalid_argument("rate table entries must be positive");
      if (k > 0 && !(rate_table[k] > rate_table[k - 1]))
        throw std::invalid_argument("rate table must be strictly ascending");
    }
  }
}

std::vector<double> default_rate_table() {
  return {1e6, 2e6, 5.5e6, 12e6, 24e6, 48e6, 54e6};
}

double shannon_rate(const RateModel& model, double gain_squared) {
  return model.bandwidth * std::log2(1.0 + model.rho * gain_squared);
}

double floor_to_table(const std::vector<double>& table, double shannon) {
  auto it = std::lower_bound(table.begin(), table.end(), shannon);
  if (it == table.begin()) return 0.0;
  return *std::prev(it);
}

std::vector<double> discrete_bin_masses(const RateModel& model) {
  const auto& table = model.rate_table;
  std::vector<double> masses(table.size() + 1, 0.0);
  for (std::size_t k = 0; k < table.size(); ++k) {
    const double upper = k + 1 < table.size()
                             ? shannon_tail(model.bandwidth, model.rho,
                                            table[k + 1])
                             : 0.0;
    masses[k] = shannon_tail(model.bandwidth, model.rho, table[k]) - upper;
  }
  masses.back() = 1.0 - shannon_tail(model.bandwidth, model.rho, table.front());
  return masses;
}

double tail_prob(const RateModel& model, double threshold) {
  if (threshold <= 0.0) return 1.0;
  switch (model.kind) {
    case ChannelKind::kIidRayleigh:
    case ChannelKind::kJakesRayleigh:
      return shannon_tail(model.bandwidth, model.rho, threshold);
    case ChannelKind::kDiscreteMapped: {
      const auto masses = discrete_bin_masses(model);
      double sum = 0.0;
      for (std::size_t k = 0; k < model.rate_table.size(); ++k)
        if (model.rate_table[k] >= threshold) sum += masses[k];
      return sum;
    }
    case ChannelKind::kConstant:
      return model.constant_rate >= threshold ? 1.0 : 0.0;
  }
  return 0.0;
}

double censored_mean(const RateModel& model, double threshold) {
  if (!std::isfinite(threshold)) return 0.0;
  if (is_continuous_rayleigh(model))
    return shannon_censored(model.bandwidth, model.rho, threshold);
  if (model.kind == ChannelKind::kDiscreteMapped) {
    const auto masses = discrete_bin_masses(model);
    double sum = 0.0;
    for (std::size_t k = 0; k < model.rate_table.size(); ++k)
      if (model.rate_table[k] >= threshold)
        sum += model.rate_table[k] * masses[k];
    return sum;
  }
  return model.constant_rate >= threshold ? model.constant_rate : 0.0;
}

double excess_mean(const RateModel& model, double threshold) {
  if (!std::isfinite(threshold)) return 0.0;
  const double x = std::max(0.0, threshold);
  if (is_continuous_rayleigh(model))
    return shannon_excess(model.bandwidth, model.rho, x);
  if (model.kind == ChannelKind::kDiscreteMapped) {
    const auto masses = discrete_bin_masses(model);
    double sum = 0.0;
    for (std::size_t k = 0; k < model.rate_table.size(); ++k)
      sum += std::max(0.0, model.rate_table[k] - x) * masses[k];
    return sum;
  }
  return std::max(0.0, model.constant_rate - x);
}

double mean_rate(const RateModel& model) { return censored_mean(model, 0.0); }

JakesProcess::JakesProcess(double doppler, Rng& rng) : doppler_(doppler) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi,
                                               std::numbers::pi);
  const double theta = angle(rng);
  for (int n = 0; n < kOscillators; ++n) {
    // Arrival angles spread over a quarter circle with a random offset.
    const double alpha =
        (2.0 * std::numbers::pi * (n + 1) - std::numbers::pi + theta) /
        (4.0 * kOscillators);
    freq_i_[n] = doppler_ * std::cos(alpha);
    freq_q_[n] = doppler_ * std::sin(alpha);
    phase_i_[n] = angle(rng);
    phase_q_[n] = angle(rng);
  }
}

std::array<double, 2> JakesProcess::gain(double now) const {
  double re = 0.0;
  double im = 0.0;
  for (int n = 0; n < kOscillators; ++n) {
    re += std::cos(freq_i_[n] * now + phase_i_[n]);
    im += std::cos(freq_q_[n] * now + phase_q_[n]);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(kOscillators));
  return {re * scale, im * scale};
}

double JakesProcess::gain_squared(double now) const {
  const auto h = gain(now);
  return h[0] * h[0] + h[1] * h[1];
}

ChannelSampler::ChannelSampler(RateModel model, Rng rng)
    : model_(std::move(model)), rng_(std::move(rng)) {
  model_.validate();
  if (model_.kind == ChannelKind::kJakesRayleigh)
    jakes_ = JakesProcess(model_.doppler, rng_);
}

double ChannelSampler::sample(double now) {
  switch (model_.kind) {
    case ChannelKind::kIidRayleigh:
      return shannon_rate(model_, std::exponential_distribution<double>(1.0)(rng_));
    case ChannelKind::kJakesRayleigh:
      return shannon_rate(model_, jakes_.gain_squared(now));
    case ChannelKind::kDiscreteMapped: {
      const double g = std::exponential_distribution<double>(1.0)(rng_);
      return floor_to_table(model_.rate_table, shannon_rate(model_, g));
    }
    case ChannelKind::kConstant:
      return model_.constant_rate;
  }
  return 0.0;
}

}  // namespace docsim::channel
