#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace wfl {

// One line of the per-round stream.
struct RoundRecord {
  long round = 0;
  double clock_s = 0.0;
  double duration_s = 0.0;
  int n_activated = 0;
  std::vector<std::string> activated;
  std::vector<std::string> dropped;
  double loss = 0.0;
  double r_t = 0.0;
  double eta_t = 0.0;
  double energy_j = 0.0;  // energy added this round
  std::uint64_t bits_attempted = 0;
  std::uint64_t bits_delivered = 0;
  std::uint64_t packets_lost = 0;
  double throughput_bps = 0.0;
  std::string binder;
  std::vector<double> model;  // committed global model when tracking is on
};

struct SimulationReport {
  std::vector<RoundRecord> rounds;
  std::string fired_condition;
  long total_rounds = 0;
  double total_time_s = 0.0;
  double total_energy_j = 0.0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<double> final_model;
  std::map<std::string, double> per_agent_energy_j;
  std::uint64_t bits_attempted = 0;
  std::uint64_t bits_delivered = 0;
  std::uint64_t packets_lost = 0;

  // One JSON record per round followed by a summary record.
  std::string to_jsonl() const;
  static SimulationReport from_jsonl(const std::string& text);
};

}  // namespace wfl
