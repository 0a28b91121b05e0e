#include "wfl/report.hpp"

#include <sstream>

#include <nlohmann/json.hpp>

#include "wfl/errors.hpp"

namespace wfl {

using nlohmann::json;

std::string SimulationReport::to_jsonl() const {
  std::ostringstream os;
  for (const RoundRecord& r : rounds) {
    json j;
    j["type"] = "round";
    j["round"] = r.round;
    j["clock_s"] = r.clock_s;
    j["duration_s"] = r.duration_s;
    j["n_activated"] = r.n_activated;
    j["activated"] = r.activated;
    j["dropped"] = r.dropped;
    j["loss"] = r.loss;
    j["r_t"] = r.r_t;
    j["eta_t"] = r.eta_t;
    j["energy_j"] = r.energy_j;
    j["bits_attempted"] = r.bits_attempted;
    j["bits_delivered"] = r.bits_delivered;
    j["packets_lost"] = r.packets_lost;
    j["throughput_bps"] = r.throughput_bps;
    j["binder"] = r.binder;
    if (!r.model.empty()) j["model"] = r.model;
    os << j.dump() << '\n';
  }
  json s;
  s["type"] = "summary";
  s["fired_condition"] = fired_condition;
  s["total_rounds"] = total_rounds;
  s["total_time_s"] = total_time_s;
  s["total_energy_j"] = total_energy_j;
  s["initial_loss"] = initial_loss;
  s["final_loss"] = final_loss;
  s["final_model"] = final_model;
  s["per_agent_energy_j"] = per_agent_energy_j;
  s["bits_attempted"] = bits_attempted;
  s["bits_delivered"] = bits_delivered;
  s["packets_lost"] = packets_lost;
  os << s.dump() << '\n';
  return os.str();
}

SimulationReport SimulationReport::from_jsonl(const std::string& text) {
  SimulationReport rep;
  std::istringstream is(text);
  std::string line;
  bool saw_summary = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(Errc::io_error, std::string("bad report line: ") + e.what());
    }
    const std::string type = j.value("type", "");
    if (type == "round") {
      RoundRecord r;
      r.round = j.at("round").get<long>();
      r.clock_s = j.at("clock_s").get<double>();
      r.duration_s = j.at("duration_s").get<double>();
      r.n_activated = j.at("n_activated").get<int>();
      r.activated = j.at("activated").get<std::vector<std::string>>();
      r.dropped = j.at("dropped").get<std::vector<std::string>>();
      r.loss = j.at("loss").get<double>();
      r.r_t = j.at("r_t").get<double>();
      r.eta_t = j.at("eta_t").get<double>();
      r.energy_j = j.at("energy_j").get<double>();
      r.bits_attempted = j.at("bits_attempted").get<std::uint64_t>();
      r.bits_delivered = j.at("bits_delivered").get<std::uint64_t>();
      r.packets_lost = j.at("packets_lost").get<std::uint64_t>();
      r.throughput_bps = j.at("throughput_bps").get<double>();
      r.binder = j.value("binder", "");
      if (j.contains("model")) r.model = j.at("model").get<std::vector<double>>();
      rep.rounds.push_back(std::move(r));
    } else if (type == "summary") {
      rep.fired_condition = j.at("fired_condition").get<std::string>();
      rep.total_rounds = j.at("total_rounds").get<long>();
      rep.total_time_s = j.at("total_time_s").get<double>();
      rep.total_energy_j = j.at("total_energy_j").get<double>();
      rep.initial_loss = j.at("initial_loss").get<double>();
      rep.final_loss = j.at("final_loss").get<double>();
      rep.final_model = j.at("final_model").get<std::vector<double>>();
      rep.per_agent_energy_j = j.at("per_agent_energy_j").get<std::map<std::string, double>>();
      rep.bits_attempted = j.at("bits_attempted").get<std::uint64_t>();
      rep.bits_delivered = j.at("bits_delivered").get<std::uint64_t>();
      rep.packets_lost = j.at("packets_lost").get<std::uint64_t>();
      saw_summary = true;
    } else {
      fail(Errc::io_error, "unknown report record type '" + type + "'");
    }
  }
  if (!saw_summary) fail(Errc::io_error, "report has no summary record");
  return rep;
}

}  // namespace wfl
