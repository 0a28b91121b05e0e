#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wfl/exec.hpp"
#include "wfl/learning.hpp"
#include "wfl/metrics.hpp"
#include "wfl/model_vec.hpp"
#include "wfl/report.hpp"
#include "wfl/round_types.hpp"
#include "wfl/task.hpp"
#include "wfl/topology.hpp"

namespace wfl {

enum class AggRule { fedavg_full, fedavg_partial, replace_latest, running_average };

AggRule agg_rule_from_string(const std::string& s);
std::string to_string(AggRule r);

// Server buffer update: rule(buffer, memory, incoming). An empty incoming
// list returns the buffer unchanged under every rule.
ModelVec buffer_update(const ModelVec& buffer, const ModelVec& memory,
                       const std::vector<Upload>& incoming, AggRule rule, int n_total,
                       double running_avg_weight = 0.5);

struct LrSpec {
  enum class Kind { fixed, diminishing };
  Kind kind = Kind::fixed;
  double eta = 0.1;    // fixed step size
  double mu = 0.0;     // diminishing schedule parameters
  double gamma = 0.0;
  // Scale the step by the round's participation ratio r_t.
  bool scale_by_participation = false;
  // Advance the diminishing schedule per local step (index round*E + i)
  // instead of holding it fixed across a round.
  bool per_step = false;

  double value(long t, double r_t) const;
};

struct TerminationSpec {
  std::optional<long> max_rounds;
  std::optional<double> max_sim_time_s;
  std::optional<double> max_energy_j;
  struct Target {
    std::string metric = "loss";  // only per-round metric currently evaluated
    std::string cmp = "<=";       // one of <=, >=, <, >
    double value = 0.0;
  };
  std::optional<Target> target;

  void validate() const;  // at least one condition must be set
  // Returns the name of the condition that fired, if any.
  std::optional<std::string> check(long rounds, double clock_s, double energy_j,
                                   double metric) const;
};

struct EngineConfig {
  Mode mode = Mode::sync;
  double time_window_s = 1.0;  // epsilon
  int e_local = 1;
  int batch = 1;
  AggRule rule = AggRule::fedavg_partial;
  double running_avg_weight = 0.5;
  // Optional "first K responses" gate; whichever of K and the window binds
  // first closes the activation set.
  std::optional<int> max_responses;
  LrSpec lr;
  NoiseSpec noise;
  QosChargePolicy qos;
  bool enforce_battery = false;
  bool track_model = false;  // store the committed model in each round record
};

// Server-side state between rounds: the buffer/memory pair plus the
// per-client local views used in async mode.
struct RoundState {
  long round_index = 0;
  ModelVec server_buffer;
  ModelVec server_memory;
  std::map<std::string, ModelVec> client_models;
  double clock_s = 0.0;
  Mode mode = Mode::sync;
  double time_window_s = 1.0;
};

// One simulation instance. Owns its state and per-client RNG streams; never
// shares mutable state with other engines. Client streams are keyed by
// (master seed, client id), so results are invariant to the worker plan.
class Engine {
 public:
  Engine(const Topology& topo, const ConvexTask& task, EngineConfig cfg, RngStream master,
         WorkerPlan plan = WorkerPlan{});

  void set_initial_model(const ModelVec& w0);

  RoundOutcome run_round();                              // sync mode
  RoundState async_step(const std::string& client_id);   // async mode
  SimulationReport run(const TerminationSpec& term);

  const RoundState& state() const { return state_; }
  const QosLedger& ledger() const { return ledger_; }
  const ConvexTask& task() const { return task_; }
  double objective() const { return task_.value(state_.server_memory); }

 private:
  struct ClientCtx {
    int task_index = 0;
    RngStream train;
    RngStream chan;
    RngStream noise;
    const ChannelParams* wireless = nullptr;  // the single wireless hop
    double backhaul_s = 0.0;                  // fixed p2p part of the upload time
    double epoch_time_s = 0.0;
    bool depleted = false;  // battery exhausted (only with enforce_battery)
  };
  struct PhaseResult {
    LinkSample link;
    double arrival_s = 0.0;
    ModelVec upload;
  };

  void draw_links();
  std::vector<double> step_sizes(long t, double r_t) const;
  void train_clients(const std::vector<double>& etas);
  std::vector<std::string> scheduled_ids() const;
  double compute_time(const ClientCtx& ctx) const;
  RoundOutcome finish_round(const std::vector<std::string>& activated,
                            const std::set<std::string>& dropped, double eta, double r_t,
                            const std::string& binder);
  void apply_battery(const RoundOutcome& outcome);

  const Topology& topo_;
  ConvexTask task_;
  EngineConfig cfg_;
  WorkerPlan plan_;
  RoundState state_;
  QosLedger ledger_;
  std::map<std::string, ClientCtx> clients_;
  std::map<std::string, PhaseResult> phase_;  // scratch, keyed once at startup
  std::map<std::string, const ChannelParams*> wireless_;
  double downlink_energy_j_ = 0.0;  // per-round server broadcast charge
};

}  // namespace wfl
