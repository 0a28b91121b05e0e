#include "wfl/topology.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wfl/errors.hpp"

namespace wfl {

using nlohmann::json;

Role role_from_string(const std::string& s) {
  if (s == "server") return Role::server;
  if (s == "ap") return Role::ap;
  if (s == "client") return Role::client;
  fail(Errc::malformed_attribute, "unknown role '" + s + "'");
}

std::string to_string(Role r) {
  switch (r) {
    case Role::server: return "server";
    case Role::ap: return "ap";
    case Role::client: return "client";
  }
  return "client";
}

double EdgeAttrs::p2p_time_s(std::uint64_t bits) const {
  return *p2p_delay_s + static_cast<double>(bits) / *p2p_rate_bps;
}

namespace {

double get_num(const json& j, const char* key, double fallback, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (!it->is_number()) fail(Errc::malformed_attribute, where + ": '" + key + "' must be a number");
  return it->get<double>();
}

std::optional<double> get_opt_num(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) return std::nullopt;
  if (!it->is_number()) fail(Errc::malformed_attribute, where + ": '" + key + "' must be a number");
  return it->get<double>();
}

ChannelParams parse_channel(const json& j, const std::string& where) {
  if (!j.is_object()) fail(Errc::malformed_attribute, where + ": 'channel' must be an object");
  ChannelParams p;
  p.bandwidth_hz = get_num(j, "bandwidth_hz", p.bandwidth_hz, where);
  p.transmit_power_w = get_num(j, "transmit_power_w", p.transmit_power_w, where);
  if (auto it = j.find("packet_bits"); it != j.end()) {
    if (!it->is_number_unsigned()) {
      fail(Errc::malformed_attribute, where + ": 'packet_bits' must be a positive integer");
    }
    p.packet_bits = it->get<std::uint64_t>();
  }
  p.per = get_num(j, "per", p.per, where);
  p.path_loss_exponent = get_num(j, "path_loss_exponent", p.path_loss_exponent, where);
  p.reference_distance_m = get_num(j, "reference_distance_m", p.reference_distance_m, where);
  p.shadowing_sigma_db = get_num(j, "shadowing_sigma_db", p.shadowing_sigma_db, where);
  p.fading_m = get_num(j, "fading_m", p.fading_m, where);
  if (auto it = j.find("fading"); it != j.end()) {
    if (!it->is_boolean()) fail(Errc::malformed_attribute, where + ": 'fading' must be a bool");
    p.fading_enabled = it->get<bool>();
  }
  p.antenna_gain = get_num(j, "antenna_gain", p.antenna_gain, where);
  p.noise_temp_k = get_num(j, "noise_temp_k", p.noise_temp_k, where);
  p.distance_m = get_num(j, "distance_m", p.distance_m, where);
  try {
    p.validate();
  } catch (const Error& e) {
    fail(Errc::malformed_attribute, where + ": " + e.what());
  }
  return p;
}

json channel_to_json(const ChannelParams& p) {
  json j;
  j["bandwidth_hz"] = p.bandwidth_hz;
  j["transmit_power_w"] = p.transmit_power_w;
  j["packet_bits"] = p.packet_bits;
  j["per"] = p.per;
  j["path_loss_exponent"] = p.path_loss_exponent;
  j["reference_distance_m"] = p.reference_distance_m;
  j["shadowing_sigma_db"] = p.shadowing_sigma_db;
  j["fading_m"] = p.fading_m;
  j["fading"] = p.fading_enabled;
  j["antenna_gain"] = p.antenna_gain;
  j["noise_temp_k"] = p.noise_temp_k;
  j["distance_m"] = p.distance_m;
  return j;
}

EdgeAttrs parse_edge(const json& j, const std::string& where) {
  if (!j.is_object()) fail(Errc::malformed_attribute, where + ": edge attributes must be an object");
  EdgeAttrs e;
  const bool has_channel = j.contains("channel");
  const bool has_p2p = j.contains("p2p_rate_bps") || j.contains("p2p_delay_s");
  if (has_channel == has_p2p) {
    fail(Errc::malformed_attribute,
         where + ": edge needs exactly one of 'channel' or 'p2p_rate_bps'/'p2p_delay_s'");
  }
  if (has_channel) {
    e.channel = parse_channel(j.at("channel"), where);
  } else {
    e.p2p_rate_bps = get_opt_num(j, "p2p_rate_bps", where);
    if (!e.p2p_rate_bps || *e.p2p_rate_bps <= 0.0) {
      fail(Errc::malformed_attribute, where + ": 'p2p_rate_bps' must be a positive number");
    }
    e.p2p_delay_s = get_opt_num(j, "p2p_delay_s", where).value_or(0.0);
    if (*e.p2p_delay_s < 0.0) {
      fail(Errc::malformed_attribute, where + ": 'p2p_delay_s' must be nonnegative");
    }
  }
  return e;
}

// Rejects duplicate keys anywhere in the document; the stock parser would
// silently keep the last occurrence.
void check_duplicate_keys(const std::string& text) {
  std::vector<std::set<std::string>> scopes;
  json::parser_callback_t cb = [&scopes](int /*depth*/, json::parse_event_t event, json& parsed) {
    switch (event) {
      case json::parse_event_t::object_start:
        scopes.emplace_back();
        break;
      case json::parse_event_t::object_end:
        scopes.pop_back();
        break;
      case json::parse_event_t::key: {
        const std::string key = parsed.get<std::string>();
        if (!scopes.back().insert(key).second) {
          fail(Errc::duplicate_id, "duplicate key '" + key + "' in document");
        }
        break;
      }
      default:
        break;
    }
    return true;
  };
  [[maybe_unused]] const json discarded = json::parse(text, cb);
}

}  // namespace

Topology Topology::parse(const std::string& text) {
  json doc;
  try {
    check_duplicate_keys(text);
    doc = json::parse(text);
  } catch (const Error&) {
    throw;
  } catch (const json::exception& e) {
    fail(Errc::malformed_attribute, std::string("document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) fail(Errc::malformed_attribute, "document root must be an object of agents");

  Topology topo;
  for (const auto& [id, spec] : doc.items()) {
    if (!spec.is_object()) fail(Errc::malformed_attribute, "agent '" + id + "' must be an object");
    AgentSpec a;
    a.id = id;
    if (!spec.contains("role") || !spec.at("role").is_string()) {
      fail(Errc::malformed_attribute, "agent '" + id + "' is missing a string 'role'");
    }
    try {
      a.role = role_from_string(spec.at("role").get<std::string>());
    } catch (const Error& e) {
      fail(Errc::malformed_attribute, "agent '" + id + "': " + e.what());
    }
    if (auto it = spec.find("cell"); it != spec.end()) {
      if (!it->is_string()) fail(Errc::malformed_attribute, "agent '" + id + "': 'cell' must be a string");
      a.cell_id = it->get<std::string>();
    }
    a.compute_power_w = get_num(spec, "compute_power_w", 0.0, "agent '" + id + "'");
    a.compute_time_per_epoch_s = get_num(spec, "compute_time_per_epoch_s", 0.0, "agent '" + id + "'");
    a.compute_time_per_sample_s = get_opt_num(spec, "compute_time_per_sample_s", "agent '" + id + "'");
    a.tx_power_w = get_opt_num(spec, "tx_power_w", "agent '" + id + "'");
    a.battery_j = get_opt_num(spec, "battery_j", "agent '" + id + "'");
    a.speed_mps = get_opt_num(spec, "speed_mps", "agent '" + id + "'");
    if (a.compute_power_w < 0 || a.compute_time_per_epoch_s < 0 ||
        (a.compute_time_per_sample_s && *a.compute_time_per_sample_s < 0) ||
        (a.battery_j && *a.battery_j <= 0)) {
      fail(Errc::malformed_attribute, "agent '" + id + "': negative compute/battery attribute");
    }
    if (auto it = spec.find("position"); it != spec.end()) {
      if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number()) {
        fail(Errc::malformed_attribute, "agent '" + id + "': 'position' must be [x, y]");
      }
      a.position = std::array<double, 2>{(*it)[0].get<double>(), (*it)[1].get<double>()};
    }
    if (auto it = spec.find("adj"); it != spec.end()) {
      if (!it->is_object()) fail(Errc::malformed_attribute, "agent '" + id + "': 'adj' must be an object");
      for (const auto& [nbr, attrs] : it->items()) {
        a.adj.emplace(nbr, parse_edge(attrs, "edge " + id + " -> " + nbr));
      }
    }
    topo.agents_.emplace(id, std::move(a));
  }
  topo.validate_and_finalize();
  return topo;
}

Topology Topology::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open topology file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void Topology::validate_and_finalize() {
  // exactly one server
  for (const auto& [id, a] : agents_) {
    if (a.role != Role::server) continue;
    if (!server_id_.empty()) {
      fail(Errc::multiple_servers, "agents '" + server_id_ + "' and '" + id + "' both claim role server");
    }
    server_id_ = id;
  }
  if (server_id_.empty()) fail(Errc::missing_server, "no agent has role server");

  // neighbors must exist; mirror edges declared in one direction only
  for (auto& [id, a] : agents_) {
    for (const auto& [nbr, attrs] : a.adj) {
      auto it = agents_.find(nbr);
      if (it == agents_.end()) {
        fail(Errc::malformed_attribute, "edge " + id + " -> " + nbr + " references unknown agent");
      }
      it->second.adj.emplace(id, attrs);  // no-op when the reverse direction exists
    }
  }

  // reachability from the server
  std::set<std::string> seen{server_id_};
  std::deque<std::string> queue{server_id_};
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    for (const auto& [nbr, attrs] : agents_.at(cur).adj) {
      if (seen.insert(nbr).second) queue.push_back(nbr);
    }
  }
  for (const auto& [id, a] : agents_) {
    if (a.role == Role::client && !seen.count(id)) {
      fail(Errc::unreachable_client, "client '" + id + "' is not connected to the server");
    }
  }

  // resolve cells
  for (auto& [id, a] : agents_) {
    if (a.role == Role::ap && a.cell_id.empty()) a.cell_id = id;
  }
  for (auto& [id, a] : agents_) {
    if (a.role != Role::client) continue;
    if (a.cell_id.empty()) {
      for (const auto& [nbr, attrs] : a.adj) {  // std::map: lexicographic order
        if (agents_.at(nbr).role == Role::ap) {
          a.cell_id = agents_.at(nbr).cell_id;
          break;
        }
      }
    }
    if (a.cell_id.empty()) a.cell_id = id;
    cells_[a.cell_id].push_back(id);
  }
  for (auto& [cell, ids] : cells_) std::sort(ids.begin(), ids.end());
}

std::string Topology::serialize() const {
  json doc(json::value_t::object);
  for (const auto& [id, a] : agents_) {
    json spec;
    spec["role"] = to_string(a.role);
    if (!a.cell_id.empty()) spec["cell"] = a.cell_id;
    spec["compute_power_w"] = a.compute_power_w;
    spec["compute_time_per_epoch_s"] = a.compute_time_per_epoch_s;
    if (a.compute_time_per_sample_s) spec["compute_time_per_sample_s"] = *a.compute_time_per_sample_s;
    if (a.tx_power_w) spec["tx_power_w"] = *a.tx_power_w;
    if (a.battery_j) spec["battery_j"] = *a.battery_j;
    if (a.position) spec["position"] = {(*a.position)[0], (*a.position)[1]};
    if (a.speed_mps) spec["speed_mps"] = *a.speed_mps;
    json adj(json::value_t::object);
    for (const auto& [nbr, e] : a.adj) {
      json edge;
      if (e.is_wireless()) {
        edge["channel"] = channel_to_json(*e.channel);
      } else {
        edge["p2p_rate_bps"] = *e.p2p_rate_bps;
        edge["p2p_delay_s"] = *e.p2p_delay_s;
      }
      adj[nbr] = std::move(edge);
    }
    spec["adj"] = std::move(adj);
    doc[id] = std::move(spec);
  }
  return doc.dump(2) + "\n";
}

const AgentSpec& Topology::agent(const std::string& id) const {
  auto it = agents_.find(id);
  if (it == agents_.end()) fail(Errc::unknown_id, "no agent '" + id + "'");
  return it->second;
}

std::vector<std::string> Topology::client_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, a] : agents_) {
    if (a.role == Role::client) out.push_back(id);
  }
  return out;  // agents_ is ordered
}

std::vector<std::pair<std::string, const EdgeAttrs*>> Topology::neighbors(
    const std::string& id) const {
  const AgentSpec& a = agent(id);
  std::vector<std::pair<std::string, const EdgeAttrs*>> out;
  out.reserve(a.adj.size());
  for (const auto& [nbr, e] : a.adj) out.emplace_back(nbr, &e);
  return out;  // adj is an ordered map
}

std::vector<PathHop> Topology::uplink_path(const std::string& client_id) const {
  const AgentSpec& start = agent(client_id);
  if (start.role != Role::client) {
    fail(Errc::unknown_id, "'" + client_id + "' is not a client");
  }
  // BFS toward the server; neighbor iteration order makes ties deterministic.
  std::map<std::string, std::string> parent;
  std::deque<std::string> queue{client_id};
  parent[client_id] = client_id;
  while (!queue.empty()) {
    const std::string cur = queue.front();
    queue.pop_front();
    if (cur == server_id_) break;
    for (const auto& [nbr, e] : agents_.at(cur).adj) {
      if (!parent.count(nbr)) {
        parent[nbr] = cur;
        queue.push_back(nbr);
      }
    }
  }
  if (!parent.count(server_id_)) {
    fail(Errc::unreachable_client, "client '" + client_id + "' has no path to the server");
  }
  std::vector<PathHop> reversed;
  for (std::string cur = server_id_; cur != client_id; cur = parent.at(cur)) {
    const std::string& from = parent.at(cur);
    reversed.push_back(PathHop{from, cur, &agents_.at(from).adj.at(cur)});
  }
  return {reversed.rbegin(), reversed.rend()};
}

Topology make_cellular_topology(const CellularLayout& layout) {
  json doc(json::value_t::object);
  json server;
  server["role"] = "server";
  server["tx_power_w"] = layout.server_tx_power_w;
  server["adj"] = json::object();
  const json channel_json = channel_to_json(layout.channel);
  for (int c = 0; c < layout.n_cells; ++c) {
    // zero-padded ids keep lexicographic and numeric orders identical
    char cell_name[32];
    std::snprintf(cell_name, sizeof cell_name, "cell%03d", c);
    const std::string ap_id = std::string("ap") + (cell_name + 4);
    server["adj"][ap_id] = {{"p2p_rate_bps", layout.backhaul_rate_bps},
                            {"p2p_delay_s", layout.backhaul_delay_s}};
    json ap;
    ap["role"] = "ap";
    ap["cell"] = cell_name;
    ap["adj"] = json::object();
    for (int m = 0; m < layout.clients_per_cell; ++m) {
      char client_id[32];
      std::snprintf(client_id, sizeof client_id, "client%03d_%02d", c, m);
      ap["adj"][client_id] = {{"channel", channel_json}};
      json cl;
      cl["role"] = "client";
      cl["cell"] = cell_name;
      cl["compute_power_w"] = layout.compute_power_w;
      cl["compute_time_per_epoch_s"] = layout.compute_time_per_epoch_s;
      if (layout.compute_time_per_sample_s) {
        cl["compute_time_per_sample_s"] = *layout.compute_time_per_sample_s;
      }
      doc[client_id] = std::move(cl);
    }
    doc[ap_id] = std::move(ap);
  }
  doc["server0"] = std::move(server);
  return Topology::parse(doc.dump());
}

}  // namespace wfl
