#include "wfl/metrics.hpp"

#include <algorithm>
#include <limits>

#include "wfl/errors.hpp"

namespace wfl {

void QosLedger::merge(const QosLedger& other) {
  for (const auto& [id, e] : other.energy_j) energy_j[id] += e;
  total_energy_j += other.total_energy_j;
  total_time_s += other.total_time_s;
  bits_attempted += other.bits_attempted;
  bits_delivered += other.bits_delivered;
  packets_lost += other.packets_lost;
  active_links_per_round.insert(active_links_per_round.end(),
                                other.active_links_per_round.begin(),
                                other.active_links_per_round.end());
  throughput_bps_per_round.insert(throughput_bps_per_round.end(),
                                  other.throughput_bps_per_round.begin(),
                                  other.throughput_bps_per_round.end());
}

RoundQos charge_round(QosLedger& ledger, const RoundOutcome& outcome, const Topology& topo,
                      const std::map<std::string, const ChannelParams*>& wireless,
                      const QosChargePolicy& policy, double server_downlink_energy_j) {
  RoundQos rq;
  // arrivals covers every scheduled client; iteration is id-sorted so energy
  // sums do not depend on arrival order or worker layout.
  for (const auto& [id, arrival] : outcome.arrivals) {
    if (!topo.has_agent(id)) fail(Errc::unknown_agent, "charge_round: no agent '" + id + "'");
    auto wit = wireless.find(id);
    if (wit == wireless.end()) fail(Errc::unknown_agent, "charge_round: no channel for '" + id + "'");
    const ChannelParams& ch = *wit->second;
    const LinkSample& ls = outcome.uplink_samples.at(id);
    const bool delivered = !outcome.dropped.count(id);

    double airtime = ls.total_time_s;
    if (!delivered && !policy.dropped_full_airtime) {
      airtime = std::min(airtime, outcome.epsilon_s);
    }
    const double compute_s = outcome.compute_s.at(id);
    const double energy = ch.transmit_power_w * airtime +
                          topo.agent(id).compute_power_w * compute_s;
    ledger.energy_j[id] += energy;
    ledger.total_energy_j += energy;
    rq.energy_j += energy;

    const std::uint64_t attempted = ch.packet_bits * ls.retransmissions;
    ledger.bits_attempted += attempted;
    rq.bits_attempted += attempted;
    if (delivered) {
      ledger.bits_delivered += ch.packet_bits;
      rq.bits_delivered += ch.packet_bits;
      ledger.packets_lost += ls.retransmissions - 1;
      rq.packets_lost += ls.retransmissions - 1;
    } else {
      ledger.packets_lost += ls.retransmissions;
      rq.packets_lost += ls.retransmissions;
    }
  }
  if (policy.charge_downlink && server_downlink_energy_j > 0.0) {
    ledger.energy_j[topo.server_id()] += server_downlink_energy_j;
    ledger.total_energy_j += server_downlink_energy_j;
    rq.energy_j += server_downlink_energy_j;
  }
  rq.active_links = static_cast<int>(outcome.activated.size());
  rq.throughput_bps = outcome.round_duration_s > 0.0
                          ? static_cast<double>(rq.bits_delivered) / outcome.round_duration_s
                          : 0.0;
  ledger.active_links_per_round.push_back(rq.active_links);
  ledger.throughput_bps_per_round.push_back(rq.throughput_bps);
  ledger.total_time_s += outcome.round_duration_s;
  return rq;
}

double fairness_ratio(const QosLedger& ledger, const Topology& topo) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  int counted = 0;
  for (const auto& [id, e] : ledger.energy_j) {
    if (topo.agent(id).role != Role::client || e <= 0.0) continue;
    lo = std::min(lo, e);
    hi = std::max(hi, e);
    ++counted;
  }
  if (counted < 2) {
    fail(Errc::degenerate_metric, "fairness_ratio needs >= 2 clients with positive energy");
  }
  return hi / lo;
}

double throughput(const QosLedger& ledger, std::size_t round,
                  const std::vector<double>& round_durations) {
  if (round >= ledger.throughput_bps_per_round.size() || round >= round_durations.size()) {
    fail(Errc::invalid_parameter, "round " + std::to_string(round) + " not recorded");
  }
  if (round_durations[round] <= 0.0) {
    fail(Errc::zero_duration, "round " + std::to_string(round) + " has zero duration");
  }
  return ledger.throughput_bps_per_round[round];
}

}  // namespace wfl
