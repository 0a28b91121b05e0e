#include <doctest.h>

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wfl/errors.hpp"
#include "wfl/topology.hpp"

using namespace wfl;
using nlohmann::json;

namespace {

const char* kMinimalDoc = R"({
  "server0": { "role": "server",
               "adj": { "ap0": { "p2p_rate_bps": 5e8, "p2p_delay_s": 0.02 } } },
  "ap0": { "role": "ap", "cell": "cell0",
           "adj": { "client0": { "channel": { "per": 0.0 } } } },
  "client0": { "role": "client", "compute_power_w": 0.5 }
})";

std::string fixture_path() { return std::string(WFL_FIXTURE_DIR) + "/topology_11.json"; }

json minimal_json() { return json::parse(kMinimalDoc); }

}  // namespace

TEST_CASE("minimal document parses into three agents and one cell") {
  const Topology topo = Topology::parse(kMinimalDoc);
  CHECK(topo.agents().size() == 3);
  CHECK(topo.server_id() == "server0");
  REQUIRE(topo.cells().count("cell0") == 1);
  CHECK(topo.cells().at("cell0") == std::vector<std::string>{"client0"});
  CHECK(topo.client_ids() == std::vector<std::string>{"client0"});
  // defaults fill the unspecified channel fields
  const auto& edge = topo.agent("ap0").adj.at("client0");
  REQUIRE(edge.is_wireless());
  CHECK(edge.channel->bandwidth_hz == 1e7);
  CHECK(edge.channel->transmit_power_w == 0.72);
  CHECK(edge.channel->packet_bits == 1000);
}

TEST_CASE("edges declared one way are mirrored") {
  const Topology topo = Topology::parse(kMinimalDoc);
  const auto& reverse = topo.agent("client0").adj;
  REQUIRE(reverse.count("ap0") == 1);
  CHECK(reverse.at("ap0").is_wireless());
  CHECK(topo.agent("ap0").adj.count("server0") == 1);
}

TEST_CASE("missing role is a malformed-attribute error naming the agent") {
  json doc = minimal_json();
  doc["client0"].erase("role");
  try {
    Topology::parse(doc.dump());
    FAIL("expected a malformed-attribute error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::malformed_attribute);
    CHECK(std::string(e.what()).find("client0") != std::string::npos);
  }
}

TEST_CASE("validation rejects each documented error class") {
  SUBCASE("duplicate id") {
    const std::string doc = R"({"a": {"role": "server"}, "a": {"role": "client"}})";
    try {
      Topology::parse(doc);
      FAIL("expected duplicate-id");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::duplicate_id);
    }
  }
  SUBCASE("missing server") {
    json doc = minimal_json();
    doc["server0"]["role"] = "ap";
    try {
      Topology::parse(doc.dump());
      FAIL("expected missing-server");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::missing_server);
    }
  }
  SUBCASE("multiple servers") {
    json doc = minimal_json();
    doc["server1"] = {{"role", "server"}};
    try {
      Topology::parse(doc.dump());
      FAIL("expected multiple-servers");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::multiple_servers);
    }
  }
  SUBCASE("unreachable client") {
    json doc = minimal_json();
    doc["client9"] = {{"role", "client"}};
    try {
      Topology::parse(doc.dump());
      FAIL("expected unreachable-client");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::unreachable_client);
      CHECK(std::string(e.what()).find("client9") != std::string::npos);
    }
  }
  SUBCASE("bad role string") {
    json doc = minimal_json();
    doc["client0"]["role"] = "gateway";
    CHECK_THROWS_AS(Topology::parse(doc.dump()), Error);
  }
  SUBCASE("edge with both channel and p2p attributes") {
    json doc = minimal_json();
    doc["ap0"]["adj"]["client0"]["p2p_rate_bps"] = 1e6;
    try {
      Topology::parse(doc.dump());
      FAIL("expected malformed-attribute");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::malformed_attribute);
    }
  }
  SUBCASE("edge referencing an unknown agent") {
    json doc = minimal_json();
    doc["ap0"]["adj"]["ghost"] = {{"p2p_rate_bps", 1e6}};
    try {
      Topology::parse(doc.dump());
      FAIL("expected malformed-attribute");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::malformed_attribute);
      CHECK(std::string(e.what()).find("ghost") != std::string::npos);
    }
  }
  SUBCASE("out-of-range channel parameter") {
    json doc = minimal_json();
    doc["ap0"]["adj"]["client0"]["channel"]["per"] = 1.0;
    CHECK_THROWS_AS(Topology::parse(doc.dump()), Error);
  }
}

TEST_CASE("every mutated field maps onto a documented error class") {
  const json valid = minimal_json();
  const json bogus = json::object({{"__", 1}});
  int mutations = 0;
  for (const auto& [agent_id, agent] : valid.items()) {
    for (const auto& [field, value] : agent.items()) {
      json doc = valid;
      doc[agent_id][field] = bogus;  // wrong type for every scalar attribute
      try {
        Topology::parse(doc.dump());
        FAIL("mutation of ", agent_id, ".", field, " was accepted");
      } catch (const Error& e) {
        const Errc c = e.code();
        CHECK((c == Errc::malformed_attribute || c == Errc::missing_server ||
               c == Errc::multiple_servers || c == Errc::unreachable_client ||
               c == Errc::duplicate_id));
      }
      ++mutations;
    }
  }
  CHECK(mutations >= 5);
}

TEST_CASE("neighbors are sorted and unknown lookups fail") {
  const Topology topo = Topology::parse(kMinimalDoc);
  const auto server_nbrs = topo.neighbors("server0");
  REQUIRE(server_nbrs.size() == 1);
  CHECK(server_nbrs[0].first == "ap0");
  CHECK_FALSE(server_nbrs[0].second->is_wireless());
  CHECK_THROWS_AS(topo.neighbors("nobody"), Error);
}

TEST_CASE("uplink paths end at the server") {
  SUBCASE("client behind an access point") {
    const Topology topo = Topology::parse(kMinimalDoc);
    const auto path = topo.uplink_path("client0");
    REQUIRE(path.size() == 2);
    CHECK(path[0].from == "client0");
    CHECK(path[0].to == "ap0");
    CHECK(path[0].attrs->is_wireless());
    CHECK(path[1].to == "server0");
    CHECK_FALSE(path[1].attrs->is_wireless());
  }
  SUBCASE("client directly adjacent to the server") {
    const std::string doc = R"({
      "server0": { "role": "server", "adj": { "c0": { "channel": {} } } },
      "c0": { "role": "client" }
    })";
    const Topology topo = Topology::parse(doc);
    const auto path = topo.uplink_path("c0");
    REQUIRE(path.size() == 1);
    CHECK(path[0].attrs->is_wireless());
  }
}

TEST_CASE("golden 11-agent fixture") {
  const Topology topo = Topology::parse_file(fixture_path());
  CHECK(topo.agents().size() == 11);
  CHECK(topo.cells().size() == 2);
  CHECK(topo.client_ids().size() == 8);
  for (const std::string& id : topo.client_ids()) {
    const auto path = topo.uplink_path(id);
    CHECK(path.size() == 2);
    REQUIRE(topo.neighbors(id).size() == 1);
    CHECK(topo.neighbors(id)[0].second->is_wireless());
  }
  const auto& backhaul = topo.agent("server0").adj.at("ap000");
  CHECK(*backhaul.p2p_rate_bps == 5e8);
  CHECK(*backhaul.p2p_delay_s == 0.02);
}

TEST_CASE("parse-serialize-parse is a fixed point") {
  for (const std::string& text :
       {std::string(kMinimalDoc), [] {
          std::ifstream in(fixture_path());
          std::ostringstream buf;
          buf << in.rdbuf();
          return buf.str();
        }()}) {
    const Topology first = Topology::parse(text);
    const std::string canon = first.serialize();
    const Topology second = Topology::parse(canon);
    CHECK(second.serialize() == canon);
  }
}

TEST_CASE("cellular builder matches the committed fixture shape") {
  CellularLayout layout;
  layout.n_cells = 2;
  layout.clients_per_cell = 4;
  layout.compute_power_w = 0.5;
  layout.compute_time_per_epoch_s = 0.01;
  const Topology topo = make_cellular_topology(layout);
  const Topology golden = Topology::parse_file(fixture_path());
  CHECK(topo.serialize() == golden.serialize());
}
