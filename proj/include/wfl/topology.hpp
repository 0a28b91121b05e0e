#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wfl/channel.hpp"

namespace wfl {

enum class Role { server, ap, client };

Role role_from_string(const std::string& s);
std::string to_string(Role r);

// Attributes of one directed edge. Wireless edges carry channel parameters;
// backhaul edges carry a point-to-point rate/delay pair. Exactly one of the
// two shapes is populated.
struct EdgeAttrs {
  std::optional<ChannelParams> channel;
  std::optional<double> p2p_rate_bps;
  std::optional<double> p2p_delay_s;

  bool is_wireless() const { return channel.has_value(); }
  // Fixed traversal time of a backhaul hop for a packet of `bits`.
  double p2p_time_s(std::uint64_t bits) const;
};

struct AgentSpec {
  std::string id;
  Role role = Role::client;
  std::string cell_id;  // resolved during parsing, see Topology docs
  double compute_power_w = 0.0;
  double compute_time_per_epoch_s = 0.0;
  std::optional<double> compute_time_per_sample_s;
  std::optional<double> tx_power_w;  // server downlink transmit power
  std::optional<double> battery_j;
  std::optional<std::array<double, 2>> position;
  std::optional<double> speed_mps;  // parsed and stored; static during a run
  std::map<std::string, EdgeAttrs> adj;
};

struct PathHop {
  std::string from;
  std::string to;
  const EdgeAttrs* attrs = nullptr;
};

// Validated agent graph. Immutable after parsing.
//
// Document format: a JSON object with one entry per agent id. The first
// layer holds the scalar agent attributes ("role", "cell", compute figures,
// "battery_j", "position", "speed_mps") plus an "adj" object keyed by
// neighbor id whose entries hold the edge attributes ("channel" object with
// ChannelParams fields, or "p2p_rate_bps"/"p2p_delay_s"). An edge declared
// in only one direction is mirrored to the other; attributes declared on
// both directions stay per-direction.
//
// A client's cell is its explicit "cell" attribute, else the cell of the
// lexicographically first adjacent access point (whose own cell defaults to
// its id), else the client id itself.
class Topology {
 public:
  static Topology parse(const std::string& text);
  static Topology parse_file(const std::string& path);
  std::string serialize() const;  // canonical form; parse(serialize()) round-trips

  const AgentSpec& agent(const std::string& id) const;
  bool has_agent(const std::string& id) const { return agents_.count(id) > 0; }
  const std::map<std::string, AgentSpec>& agents() const { return agents_; }
  const std::string& server_id() const { return server_id_; }
  const std::map<std::string, std::vector<std::string>>& cells() const { return cells_; }
  std::vector<std::string> client_ids() const;  // sorted

  // Adjacency sorted by neighbor id.
  std::vector<std::pair<std::string, const EdgeAttrs*>> neighbors(const std::string& id) const;

  // Shortest hop path from a client up to the server (ties broken by id).
  std::vector<PathHop> uplink_path(const std::string& client_id) const;

 private:
  std::map<std::string, AgentSpec> agents_;
  std::string server_id_;
  std::map<std::string, std::vector<std::string>> cells_;

  void validate_and_finalize();
};

// Builder for the bundled experiment layouts: one server, `n_cells` access
// points on backhaul links, `clients_per_cell` wireless clients per AP.
struct CellularLayout {
  int n_cells = 2;
  int clients_per_cell = 4;
  ChannelParams channel;
  double backhaul_rate_bps = 5e8;
  double backhaul_delay_s = 0.02;
  double compute_power_w = 0.5;
  double compute_time_per_epoch_s = 0.0;
  std::optional<double> compute_time_per_sample_s;
  double server_tx_power_w = 0.15;
};
Topology make_cellular_topology(const CellularLayout& layout);

}  // namespace wfl
