#include <doctest.h>

#include "wfl/errors.hpp"
#include "wfl/metrics.hpp"

using namespace wfl;

namespace {

const char* kFourClientDoc = R"({
  "server0": { "role": "server",
               "adj": { "ap0": { "p2p_rate_bps": 5e8, "p2p_delay_s": 0.02 } } },
  "ap0": { "role": "ap",
           "adj": { "c0": { "channel": { "per": 0.0 } },
                    "c1": { "channel": { "per": 0.0 } },
                    "c2": { "channel": { "per": 0.0 } },
                    "c3": { "channel": { "per": 0.0 } } } },
  "c0": { "role": "client" }, "c1": { "role": "client" },
  "c2": { "role": "client" }, "c3": { "role": "client" }
})";

struct Fixture {
  Topology topo = Topology::parse(kFourClientDoc);
  ChannelParams channel;  // PT = 0.72 W default
  std::map<std::string, const ChannelParams*> wireless;

  Fixture() {
    channel.per = 0.0;
    for (const std::string& id : topo.client_ids()) wireless[id] = &channel;
  }

  RoundOutcome outcome_for(const std::vector<std::string>& activated,
                           const std::vector<std::string>& dropped, double airtime,
                           std::uint64_t retx) const {
    RoundOutcome out;
    out.epsilon_s = 1.0;
    out.round_duration_s = 1.0;
    LinkSample ls;
    ls.gain = 1.0;
    ls.retransmissions = retx;
    ls.single_latency_s = airtime / static_cast<double>(retx);
    ls.total_time_s = airtime;
    for (const std::string& id : activated) {
      out.activated.push_back(id);
      out.arrivals[id] = airtime;
      out.uplink_samples[id] = ls;
      out.compute_s[id] = 0.0;
    }
    for (const std::string& id : dropped) {
      out.dropped.insert(id);
      out.arrivals[id] = airtime;
      out.uplink_samples[id] = ls;
      out.compute_s[id] = 0.0;
    }
    return out;
  }
};

}  // namespace

TEST_CASE("empty round leaves the ledger untouched") {
  Fixture f;
  QosLedger ledger;
  const RoundOutcome out = f.outcome_for({}, {}, 0.0, 1);
  charge_round(ledger, out, f.topo, f.wireless, QosChargePolicy{}, 0.0);
  CHECK(ledger.total_energy_j == 0.0);
  CHECK(ledger.bits_attempted == 0);
  CHECK(ledger.active_links_per_round.back() == 0);
}

TEST_CASE("one second of airtime at 720 mW costs 0.72 J") {
  Fixture f;
  QosLedger ledger;
  const RoundOutcome out = f.outcome_for({"c0"}, {}, 1.0, 1);
  const RoundQos rq = charge_round(ledger, out, f.topo, f.wireless, QosChargePolicy{}, 0.0);
  CHECK(rq.energy_j == doctest::Approx(0.72).epsilon(1e-15));
  CHECK(ledger.energy_j.at("c0") == doctest::Approx(0.72).epsilon(1e-15));
}

TEST_CASE("three attempts of a delivered 1000-bit packet") {
  Fixture f;
  QosLedger ledger;
  const RoundOutcome out = f.outcome_for({"c0"}, {}, 0.3, 3);
  charge_round(ledger, out, f.topo, f.wireless, QosChargePolicy{}, 0.0);
  CHECK(ledger.bits_attempted == 3000);
  CHECK(ledger.bits_delivered == 1000);
  CHECK(ledger.packets_lost == 2);
}

TEST_CASE("dropped clients lose every attempt") {
  Fixture f;
  QosLedger ledger;
  const RoundOutcome out = f.outcome_for({"c0"}, {"c1"}, 0.5, 2);
  charge_round(ledger, out, f.topo, f.wireless, QosChargePolicy{}, 0.0);
  // c0: 2000 attempted, 1000 delivered, 1 lost; c1: 2000 attempted, 2 lost
  CHECK(ledger.bits_attempted == 4000);
  CHECK(ledger.bits_delivered == 1000);
  CHECK(ledger.packets_lost == 3);
  // conservation: delivered + lost bits == attempted
  CHECK(ledger.bits_delivered + ledger.packets_lost * 1000 == ledger.bits_attempted);
}

TEST_CASE("dropped airtime honors the truncation policy") {
  Fixture f;
  const RoundOutcome out = f.outcome_for({}, {"c1"}, 3.0, 1);  // window is 1 s
  QosLedger full, truncated;
  QosChargePolicy policy;
  charge_round(full, out, f.topo, f.wireless, policy, 0.0);
  policy.dropped_full_airtime = false;
  charge_round(truncated, out, f.topo, f.wireless, policy, 0.0);
  CHECK(full.energy_j.at("c1") == doctest::Approx(0.72 * 3.0).epsilon(1e-12));
  CHECK(truncated.energy_j.at("c1") == doctest::Approx(0.72 * 1.0).epsilon(1e-12));
}

TEST_CASE("downlink charge lands on the server when enabled") {
  Fixture f;
  QosLedger ledger;
  QosChargePolicy policy;
  charge_round(ledger, f.outcome_for({"c0"}, {}, 1.0, 1), f.topo, f.wireless, policy, 0.125);
  CHECK(ledger.energy_j.at("server0") == doctest::Approx(0.125).epsilon(1e-15));
  policy.charge_downlink = false;
  QosLedger off;
  charge_round(off, f.outcome_for({"c0"}, {}, 1.0, 1), f.topo, f.wireless, policy, 0.125);
  CHECK(off.energy_j.count("server0") == 0);
}

TEST_CASE("per-agent energies sum to the total") {
  Fixture f;
  QosLedger ledger;
  for (int round = 0; round < 5; ++round) {
    charge_round(ledger, f.outcome_for({"c0", "c2"}, {"c1"}, 0.25 * (round + 1), 2), f.topo,
                 f.wireless, QosChargePolicy{}, 0.01);
  }
  double sum = 0.0;
  for (const auto& [id, e] : ledger.energy_j) {
    CHECK(e >= 0.0);
    sum += e;
  }
  CHECK(sum == doctest::Approx(ledger.total_energy_j).epsilon(1e-9));
}

TEST_CASE("fairness ratio") {
  Fixture f;
  QosLedger ledger;
  ledger.energy_j = {{"c0", 2.0}, {"c1", 2.0}, {"server0", 9.0}};
  CHECK(fairness_ratio(ledger, f.topo) == doctest::Approx(1.0));
  ledger.energy_j = {{"c0", 6.19}, {"c1", 1.0}};
  CHECK(fairness_ratio(ledger, f.topo) == doctest::Approx(6.19));
  SUBCASE("scale invariance") {
    QosLedger scaled;
    scaled.energy_j = {{"c0", 6.19 * 7.5}, {"c1", 7.5}};
    CHECK(fairness_ratio(scaled, f.topo) == doctest::Approx(6.19).epsilon(1e-12));
  }
  SUBCASE("degenerate ledgers are rejected") {
    QosLedger empty;
    CHECK_THROWS_AS(fairness_ratio(empty, f.topo), Error);
    QosLedger one;
    one.energy_j = {{"c0", 1.0}};
    CHECK_THROWS_AS(fairness_ratio(one, f.topo), Error);
  }
}

TEST_CASE("per-round throughput") {
  Fixture f;
  QosLedger ledger;
  RoundOutcome out = f.outcome_for({"c0"}, {}, 0.5, 1);
  out.round_duration_s = 1.0;
  charge_round(ledger, out, f.topo, f.wireless, QosChargePolicy{}, 0.0);
  CHECK(throughput(ledger, 0, {1.0}) == doctest::Approx(1000.0));

  RoundOutcome fast = f.outcome_for({"c0", "c1", "c2", "c3"}, {}, 0.25, 1);
  fast.round_duration_s = 0.5;
  charge_round(ledger, fast, f.topo, f.wireless, QosChargePolicy{}, 0.0);
  CHECK(throughput(ledger, 1, {1.0, 0.5}) == doctest::Approx(8000.0));

  RoundOutcome idle = f.outcome_for({}, {"c0"}, 2.0, 1);
  idle.round_duration_s = 1.0;
  charge_round(ledger, idle, f.topo, f.wireless, QosChargePolicy{}, 0.0);
  CHECK(throughput(ledger, 2, {1.0, 0.5, 1.0}) == 0.0);

  CHECK_THROWS_AS(throughput(ledger, 9, {1.0}), Error);
  CHECK_THROWS_AS(throughput(ledger, 0, {0.0}), Error);
}

TEST_CASE("ledger merge accumulates in a fixed order") {
  QosLedger a, b;
  a.energy_j = {{"c0", 1.0}};
  a.total_energy_j = 1.0;
  a.bits_attempted = 100;
  a.active_links_per_round = {2};
  a.throughput_bps_per_round = {10.0};
  b.energy_j = {{"c0", 0.5}, {"c1", 2.0}};
  b.total_energy_j = 2.5;
  b.bits_attempted = 50;
  b.active_links_per_round = {3};
  b.throughput_bps_per_round = {20.0};
  a.merge(b);
  CHECK(a.energy_j.at("c0") == doctest::Approx(1.5));
  CHECK(a.energy_j.at("c1") == doctest::Approx(2.0));
  CHECK(a.total_energy_j == doctest::Approx(3.5));
  CHECK(a.bits_attempted == 150);
  CHECK(a.active_links_per_round == std::vector<int>{2, 3});
}
