#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "wfl/channel.hpp"

namespace wfl {

enum class Mode { sync, async };

Mode mode_from_string(const std::string& s);
std::string to_string(Mode m);

// Everything observable about one committed round.
struct RoundOutcome {
  long round_index = 0;
  std::vector<std::string> activated;           // arrival order, ties by id
  std::map<std::string, double> arrivals;       // upload time of every scheduled client
  std::set<std::string> dropped;
  double round_duration_s = 0.0;
  std::map<std::string, LinkSample> uplink_samples;
  std::map<std::string, double> compute_s;      // local compute time per scheduled client
  double epsilon_s = 0.0;
  double r_t = 0.0;    // participation ratio of this round
  double eta_t = 0.0;  // step size the clients trained with
  bool empty_activation = false;
  std::string binder;  // which gate closed the activation set: "window" or "count"
};

}  // namespace wfl
