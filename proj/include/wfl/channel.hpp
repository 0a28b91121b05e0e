#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wfl/rng.hpp"

namespace wfl {

inline constexpr double kBoltzmann = 1.380649e-23;  // J/K

// Static distribution parameters of one wireless uplink. Defaults are the
// picocell working point used throughout the bundled fixtures.
struct ChannelParams {
  double bandwidth_hz = 1e7;
  double transmit_power_w = 0.72;
  std::uint64_t packet_bits = 1000;
  double per = 1e-4;                    // packet error rate, in [0, 1)
  double path_loss_exponent = 2.5;      // >= 2
  double reference_distance_m = 3.5;
  double shadowing_sigma_db = 2.0;      // 0 disables shadowing
  double fading_m = 1.0;                // Nakagami shape, used when fading_enabled
  bool fading_enabled = true;
  double antenna_gain = 1.0;
  double noise_temp_k = 290.0;
  double distance_m = 20.0;

  void validate() const;  // throws Error(malformed_attribute)

  // True when neither shadowing nor fading is active, i.e. the power gain
  // (and hence the single-attempt latency) is a fixed number.
  bool deterministic_gain() const { return shadowing_sigma_db == 0.0 && !fading_enabled; }
};

// One stochastic draw of an uplink transmission.
struct LinkSample {
  double gain = 1.0;
  double single_latency_s = 0.0;
  std::uint64_t retransmissions = 1;
  double total_time_s = 0.0;  // always single_latency_s * retransmissions
};

// Distribution of the number of client responses landing inside the window.
class ResponsePmf {
 public:
  explicit ResponsePmf(std::vector<double> probs);
  const std::vector<double>& probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t eta) const { return probs_[eta]; }
  double mean() const;

 private:
  std::vector<double> probs_;
};

// Compound power gain: log-distance path loss x lognormal shadowing x
// Nakagami-m power fading. Factors with their randomness turned off
// contribute exactly 1 and consume no draws.
double sample_gain(const ChannelParams& params, RngStream& rng);

// Single-attempt latency from the Shannon-Hartley rate with thermal noise
// k_B * T * B. Throws Error(degenerate_snr) if the rate underflows to zero.
double shannon_latency(const ChannelParams& params, double gain);

// Number of attempts until first success, support {1, 2, ...}, success
// probability (1 - per).
std::uint64_t sample_retransmissions(double per, RngStream& rng);

// Full uplink draw: gain -> latency -> retransmissions.
LinkSample sample_link(const ChannelParams& params, RngStream& rng);

// P{ total transmission time > epsilon }. Exact indicator when the channel
// is fully deterministic (per == 0 and deterministic gain), Monte-Carlo
// estimate over n_samples draws otherwise.
double packet_loss_prob(const ChannelParams& params, double epsilon_s, std::uint64_t n_samples,
                        RngStream& rng);

// Exact PMF of the response count for independent non-identical links,
// computed by the O(N^2) Poisson-binomial convolution.
ResponsePmf response_pmf_heterogeneous(std::span<const double> success_probs);

// Binomial special case for homogeneous links.
ResponsePmf response_pmf_homogeneous(int n, double r);

// Law-of-large-numbers approximation of the response count: N * r.
double expected_responses(int n, double r);

}  // namespace wfl
