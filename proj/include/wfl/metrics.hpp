#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wfl/round_types.hpp"
#include "wfl/topology.hpp"

namespace wfl {

struct QosChargePolicy {
  // Dropped clients radiate their whole attempt; when false only the window
  // worth of airtime is charged.
  bool dropped_full_airtime = true;
  // Server broadcast airtime energy per round (precomputed by the engine).
  bool charge_downlink = true;
};

// Per-round aggregates handed to the report stream.
struct RoundQos {
  double energy_j = 0.0;
  std::uint64_t bits_attempted = 0;
  std::uint64_t bits_delivered = 0;
  std::uint64_t packets_lost = 0;
  int active_links = 0;
  double throughput_bps = 0.0;
};

// Cumulative QoS accounting across a simulation.
struct QosLedger {
  std::map<std::string, double> energy_j;  // per agent
  double total_energy_j = 0.0;
  double total_time_s = 0.0;
  std::uint64_t bits_attempted = 0;
  std::uint64_t bits_delivered = 0;
  std::uint64_t packets_lost = 0;
  std::vector<int> active_links_per_round;
  std::vector<double> throughput_bps_per_round;

  // Combine a partial ledger produced by another worker. Callers must apply
  // merges in a fixed order; round series are concatenated.
  void merge(const QosLedger& other);
};

// Account one committed round: per-client airtime and compute energy, bit and
// packet counters, active links, throughput. `wireless` maps each client to
// its uplink channel; `server_downlink_energy_j` is charged to the server
// when the policy enables it.
RoundQos charge_round(QosLedger& ledger, const RoundOutcome& outcome, const Topology& topo,
                      const std::map<std::string, const ChannelParams*>& wireless,
                      const QosChargePolicy& policy, double server_downlink_energy_j);

// max/min cumulative energy across clients. Requires at least two clients
// with positive energy.
double fairness_ratio(const QosLedger& ledger, const Topology& topo);

// Delivered bits of one round divided by its duration.
double throughput(const QosLedger& ledger, std::size_t round,
                  const std::vector<double>& round_durations);

}  // namespace wfl
