#include "wfl/channel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wfl/errors.hpp"

namespace wfl {

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) fail(Errc::malformed_attribute, what);
}

}  // namespace

void ChannelParams::validate() const {
  require(bandwidth_hz > 0, "bandwidth_hz must be positive");
  require(transmit_power_w > 0, "transmit_power_w must be positive");
  require(packet_bits > 0, "packet_bits must be positive");
  require(per >= 0.0 && per < 1.0, "per must lie in [0, 1)");
  require(path_loss_exponent >= 2.0, "path_loss_exponent must be >= 2");
  require(reference_distance_m > 0, "reference_distance_m must be positive");
  require(shadowing_sigma_db >= 0, "shadowing_sigma_db must be nonnegative");
  require(fading_m > 0, "fading_m must be positive");
  require(antenna_gain > 0, "antenna_gain must be positive");
  require(noise_temp_k > 0, "noise_temp_k must be positive");
  require(distance_m > 0, "distance_m must be positive");
}

double sample_gain(const ChannelParams& params, RngStream& rng) {
  // Path-loss factor; distance clamps to the reference distance from below.
  const double d = std::max(params.distance_m, params.reference_distance_m);
  double gain = params.antenna_gain *
                std::pow(params.reference_distance_m / d, params.path_loss_exponent);
  if (params.shadowing_sigma_db > 0.0) {
    const double x_db = rng.normal(0.0, params.shadowing_sigma_db);
    gain *= std::pow(10.0, x_db / 10.0);
  }
  if (params.fading_enabled) {
    // Unit-mean Nakagami-m power fading
    gain *= rng.gamma(params.fading_m, 1.0 / params.fading_m);
  }
  return gain;
}

double shannon_latency(const ChannelParams& params, double gain) {
  const double noise_w = kBoltzmann * params.noise_temp_k * params.bandwidth_hz;
  const double snr = params.transmit_power_w * gain / noise_w;
  const double rate_bps = params.bandwidth_hz * std::log2(1.0 + snr);
  if (!(rate_bps > 0.0) || !std::isfinite(rate_bps)) {
    fail(Errc::degenerate_snr,
         "achievable rate underflowed to zero at SNR " + std::to_string(snr));
  }
  return static_cast<double>(params.packet_bits) / rate_bps;
}

std::uint64_t sample_retransmissions(double per, RngStream& rng) {
  if (per < 0.0 || per >= 1.0) fail(Errc::probability_out_of_range, "per must lie in [0, 1)");
  if (per == 0.0) return 1;
  // Inverse CDF of the geometric law on {1, 2, ...}: smallest k with
  // 1 - per^k >= u.
  const double u = rng.uniform01();
  const double k = std::ceil(std::log1p(-u) / std::log(per));
  return k < 1.0 ? 1 : static_cast<std::uint64_t>(k);
}

LinkSample sample_link(const ChannelParams& params, RngStream& rng) {
  LinkSample s;
  s.gain = sample_gain(params, rng);
  s.single_latency_s = shannon_latency(params, s.gain);
  s.retransmissions = sample_retransmissions(params.per, rng);
  s.total_time_s = s.single_latency_s * static_cast<double>(s.retransmissions);
  return s;
}

double packet_loss_prob(const ChannelParams& params, double epsilon_s, std::uint64_t n_samples,
                        RngStream& rng) {
  if (n_samples < 1) fail(Errc::invalid_parameter, "n_samples must be >= 1");
  if (params.deterministic_gain() && params.per == 0.0) {
    const double latency = shannon_latency(params, sample_gain(params, rng));
    return latency > epsilon_s ? 1.0 : 0.0;
  }
  std::uint64_t lost = 0;
  for (std::uint64_t i = 0; i < n_samples; ++i) {
    if (sample_link(params, rng).total_time_s > epsilon_s) ++lost;
  }
  return static_cast<double>(lost) / static_cast<double>(n_samples);
}

ResponsePmf::ResponsePmf(std::vector<double> probs) : probs_(std::move(probs)) {}

double ResponsePmf::mean() const {
  double m = 0.0;
  for (std::size_t eta = 1; eta < probs_.size(); ++eta) {
    m += static_cast<double>(eta) * probs_[eta];
  }
  return m;
}

ResponsePmf response_pmf_heterogeneous(std::span<const double> success_probs) {
  for (double p : success_probs) {
    if (!(p >= 0.0 && p <= 1.0)) {
      fail(Errc::probability_out_of_range,
           "success probability " + std::to_string(p) + " outside [0, 1]");
    }
  }
  std::vector<double> probs{1.0};
  probs.reserve(success_probs.size() + 1);
  for (double p : success_probs) {
    probs.push_back(0.0);
    for (std::size_t k = probs.size() - 1; k >= 1; --k) {
      probs[k] = probs[k] * (1.0 - p) + probs[k - 1] * p;
    }
    probs[0] *= (1.0 - p);
  }
  return ResponsePmf(std::move(probs));
}

ResponsePmf response_pmf_homogeneous(int n, double r) {
  if (n < 0) fail(Errc::invalid_parameter, "n must be >= 0");
  if (!(r >= 0.0 && r <= 1.0)) fail(Errc::probability_out_of_range, "r outside [0, 1]");
  std::vector<double> probs(static_cast<std::size_t>(n) + 1, 0.0);
  if (r == 0.0) {
    probs[0] = 1.0;
  } else if (r == 1.0) {
    probs[static_cast<std::size_t>(n)] = 1.0;
  } else {
    // Binomial coefficients via the multiplicative recurrence; exact in
    // double until far beyond the client counts this simulator targets.
    double coef = 1.0;
    for (int eta = 0; eta <= n; ++eta) {
      if (eta > 0) coef *= static_cast<double>(n - eta + 1) / static_cast<double>(eta);
      probs[static_cast<std::size_t>(eta)] =
          coef * std::pow(r, eta) * std::pow(1.0 - r, n - eta);
    }
  }
  return ResponsePmf(std::move(probs));
}

double expected_responses(int n, double r) {
  if (!(r >= 0.0 && r <= 1.0)) fail(Errc::probability_out_of_range, "r outside [0, 1]");
  return static_cast<double>(n) * r;
}

}  // namespace wfl
