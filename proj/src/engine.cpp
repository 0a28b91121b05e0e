#include "wfl/engine.hpp"

#include <algorithm>
#include <cmath>

#include "wfl/errors.hpp"

namespace wfl {

Mode mode_from_string(const std::string& s) {
  if (s == "sync") return Mode::sync;
  if (s == "async") return Mode::async;
  fail(Errc::invalid_parameter, "unknown mode '" + s + "'");
}

std::string to_string(Mode m) { return m == Mode::sync ? "sync" : "async"; }

AggRule agg_rule_from_string(const std::string& s) {
  if (s == "fedavg-full") return AggRule::fedavg_full;
  if (s == "fedavg-partial") return AggRule::fedavg_partial;
  if (s == "replace-latest") return AggRule::replace_latest;
  if (s == "running-average") return AggRule::running_average;
  fail(Errc::invalid_parameter, "unknown aggregation rule '" + s + "'");
}

std::string to_string(AggRule r) {
  switch (r) {
    case AggRule::fedavg_full: return "fedavg-full";
    case AggRule::fedavg_partial: return "fedavg-partial";
    case AggRule::replace_latest: return "replace-latest";
    case AggRule::running_average: return "running-average";
  }
  return "fedavg-partial";
}

ModelVec buffer_update(const ModelVec& buffer, const ModelVec& memory,
                       const std::vector<Upload>& incoming, AggRule rule, int n_total,
                       double running_avg_weight) {
  if (incoming.empty()) return buffer;
  for (const Upload& u : incoming) check_same_dim(u.model, buffer);
  switch (rule) {
    case AggRule::fedavg_full:
      return aggregate_full(incoming);
    case AggRule::fedavg_partial:
      return aggregate_partial(incoming, n_total);
    case AggRule::replace_latest:
      return incoming.back().model;
    case AggRule::running_average: {
      ModelVec out = memory;
      for (const Upload& u : incoming) {
        scale(out, 1.0 - running_avg_weight);
        axpy(running_avg_weight, u.model, out);
      }
      return out;
    }
  }
  return buffer;
}

double LrSpec::value(long t, double r_t) const {
  const double r = scale_by_participation ? r_t : 1.0;
  if (kind == Kind::fixed) return r * eta;
  return lr_schedule(t, r, mu, gamma);
}

void TerminationSpec::validate() const {
  if (!max_rounds && !max_sim_time_s && !max_energy_j && !target) {
    fail(Errc::invalid_parameter, "termination needs at least one condition");
  }
  if (target) {
    if (target->metric != "loss") {
      fail(Errc::invalid_parameter, "unsupported target metric '" + target->metric + "'");
    }
    if (target->cmp != "<=" && target->cmp != ">=" && target->cmp != "<" && target->cmp != ">") {
      fail(Errc::invalid_parameter, "unsupported comparator '" + target->cmp + "'");
    }
  }
}

std::optional<std::string> TerminationSpec::check(long rounds, double clock_s, double energy_j,
                                                  double metric) const {
  if (target) {
    const double v = target->value;
    const bool hit = (target->cmp == "<=" && metric <= v) || (target->cmp == "<" && metric < v) ||
                     (target->cmp == ">=" && metric >= v) || (target->cmp == ">" && metric > v);
    if (hit) {
      return "target:" + target->metric + target->cmp + std::to_string(v);
    }
  }
  if (max_rounds && rounds >= *max_rounds) return "max_rounds";
  if (max_sim_time_s && clock_s >= *max_sim_time_s) return "max_sim_time_s";
  if (max_energy_j && energy_j >= *max_energy_j) return "max_energy_j";
  return std::nullopt;
}

Engine::Engine(const Topology& topo, const ConvexTask& task, EngineConfig cfg, RngStream master,
               WorkerPlan plan)
    : topo_(topo), task_(task), cfg_(std::move(cfg)), plan_(std::move(plan)) {
  task_.validate();
  if (plan_.cell_to_worker.empty()) plan_ = plan_partition(topo_, plan_.n_workers);

  const std::vector<std::string> ids = topo_.client_ids();
  if (static_cast<int>(ids.size()) != task_.n_clients()) {
    fail(Errc::inconsistent_inputs,
         "topology has " + std::to_string(ids.size()) + " clients, task has " +
             std::to_string(task_.n_clients()));
  }
  if (cfg_.time_window_s <= 0.0) fail(Errc::invalid_parameter, "time window must be positive");
  if (cfg_.max_responses && *cfg_.max_responses < 1) {
    fail(Errc::invalid_parameter, "max_responses must be >= 1");
  }

  int index = 0;
  for (const std::string& id : ids) {
    ClientCtx ctx{index++,
                  master.derive("client/" + id + "/train"),
                  master.derive("client/" + id + "/chan"),
                  master.derive("client/" + id + "/noise")};
    const auto path = topo_.uplink_path(id);
    for (const PathHop& hop : path) {
      if (hop.attrs->is_wireless()) {
        if (ctx.wireless) {
          fail(Errc::malformed_attribute,
               "uplink path of '" + id + "' crosses more than one wireless hop");
        }
        ctx.wireless = &*hop.attrs->channel;
      }
    }
    if (!ctx.wireless) {
      fail(Errc::malformed_attribute, "uplink path of '" + id + "' has no wireless hop");
    }
    for (const PathHop& hop : path) {
      if (!hop.attrs->is_wireless()) ctx.backhaul_s += hop.attrs->p2p_time_s(ctx.wireless->packet_bits);
    }
    const AgentSpec& agent = topo_.agent(id);
    const std::size_t samples = task_.data[static_cast<std::size_t>(ctx.task_index)].size();
    ctx.epoch_time_s = agent.compute_time_per_sample_s
                           ? *agent.compute_time_per_sample_s * static_cast<double>(samples)
                           : agent.compute_time_per_epoch_s;
    wireless_.emplace(id, ctx.wireless);
    phase_.emplace(id, PhaseResult{});
    clients_.emplace(id, std::move(ctx));
  }

  // Fixed per-round downlink broadcast charge: server airtime over each of
  // its edges at the mean (deterministic) channel gain.
  const AgentSpec& server = topo_.agent(topo_.server_id());
  const double pts = server.tx_power_w.value_or(0.0);
  if (pts > 0.0) {
    std::uint64_t bits = 0;
    for (const auto& [id, ch] : wireless_) bits = std::max(bits, ch->packet_bits);
    double airtime = 0.0;
    RngStream null_stream(0);
    for (const auto& [nbr, edge] : server.adj) {
      if (edge.is_wireless()) {
        ChannelParams det = *edge.channel;
        det.shadowing_sigma_db = 0.0;
        det.fading_enabled = false;
        airtime += shannon_latency(det, sample_gain(det, null_stream));
      } else if (bits > 0) {
        airtime += static_cast<double>(bits) / *edge.p2p_rate_bps;
      }
    }
    downlink_energy_j_ = pts * airtime;
  }

  state_.mode = cfg_.mode;
  state_.time_window_s = cfg_.time_window_s;
  set_initial_model(ModelVec(static_cast<std::size_t>(task_.dim), 0.0));
}

void Engine::set_initial_model(const ModelVec& w0) {
  if (static_cast<int>(w0.dim()) != task_.dim) {
    fail(Errc::dimension_mismatch, "initial model dim != task dim");
  }
  check_finite(w0);
  state_.server_buffer = w0;
  state_.server_memory = w0;
  for (const auto& [id, ctx] : clients_) state_.client_models[id] = w0;
}

std::vector<std::string> Engine::scheduled_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, ctx] : clients_) {
    if (!ctx.depleted) out.push_back(id);
  }
  return out;
}

double Engine::compute_time(const ClientCtx& ctx) const {
  return ctx.epoch_time_s * static_cast<double>(cfg_.e_local);
}

RoundOutcome Engine::run_round() {
  if (cfg_.mode != Mode::sync) fail(Errc::mode_mismatch, "run_round requires sync mode");
  const long t = state_.round_index;
  const std::vector<std::string> scheduled = scheduled_ids();

  // Phase A: draw every scheduled client's upload time. Drawing before local
  // training is sound (link randomness is independent of model content) and
  // lets the participation ratio steer this round's step size.
  for_each_client(plan_, topo_, scheduled, [this](const std::string& id) {
    ClientCtx& ctx = clients_.at(id);
    PhaseResult& pr = phase_.at(id);
    pr.link = sample_link(*ctx.wireless, ctx.chan);
    pr.arrival_s = pr.link.total_time_s + ctx.backhaul_s;
  });

  // Activation set: window gate, then the optional response-count gate;
  // whichever binds first. Ties in arrival order break by id.
  std::vector<std::string> by_arrival = scheduled;
  std::sort(by_arrival.begin(), by_arrival.end(), [this](const std::string& a, const std::string& b) {
    const double ta = phase_.at(a).arrival_s;
    const double tb = phase_.at(b).arrival_s;
    return ta != tb ? ta < tb : a < b;
  });
  std::vector<std::string> activated;
  for (const std::string& id : by_arrival) {
    if (phase_.at(id).arrival_s <= cfg_.time_window_s) activated.push_back(id);
  }
  std::string binder = "window";
  if (cfg_.max_responses && static_cast<int>(activated.size()) > *cfg_.max_responses) {
    activated.resize(static_cast<std::size_t>(*cfg_.max_responses));
    binder = "count";
  }
  std::set<std::string> dropped(scheduled.begin(), scheduled.end());
  for (const std::string& id : activated) dropped.erase(id);

  const double r_t = scheduled.empty() ? 0.0
                                       : static_cast<double>(activated.size()) /
                                             static_cast<double>(scheduled.size());
  const std::vector<double> etas = step_sizes(t, r_t);
  const double eta = etas.empty() ? cfg_.lr.value(t, r_t) : etas.front();

  // Phase B: every scheduled client trains on the broadcast model; dropped
  // clients still burn the compute, their upload just never lands.
  train_clients(etas);

  return finish_round(activated, dropped, eta, r_t, binder);
}

std::vector<double> Engine::step_sizes(long t, double r_t) const {
  std::vector<double> etas(static_cast<std::size_t>(cfg_.e_local));
  for (std::size_t i = 0; i < etas.size(); ++i) {
    // per-step fidelity advances the schedule along round*E + i
    const long index = cfg_.lr.per_step ? t * cfg_.e_local + static_cast<long>(i) : t;
    etas[i] = cfg_.lr.value(index, r_t);
  }
  return etas;
}

void Engine::train_clients(const std::vector<double>& etas) {
  const std::vector<std::string> scheduled = scheduled_ids();
  for_each_client(plan_, topo_, scheduled, [this, &etas](const std::string& id) {
    ClientCtx& ctx = clients_.at(id);
    PhaseResult& pr = phase_.at(id);
    ModelVec local =
        local_sgd(state_.server_memory, task_, ctx.task_index, etas, cfg_.batch, ctx.train);
    if (cfg_.noise.active() && cfg_.noise.malicious_ids.count(id)) {
      local = inject_noise(local, cfg_.noise.mode, cfg_.noise.nis, ctx.noise);
    }
    pr.upload = std::move(local);
  });
}

RoundOutcome Engine::finish_round(const std::vector<std::string>& activated,
                                  const std::set<std::string>& dropped, double eta, double r_t,
                                  const std::string& binder) {
  RoundOutcome out;
  out.round_index = state_.round_index;
  out.activated = activated;
  out.dropped = dropped;
  out.epsilon_s = cfg_.time_window_s;
  out.r_t = r_t;
  out.eta_t = eta;
  out.binder = binder;
  out.empty_activation = activated.empty();

  for (const auto& [id, ctx] : clients_) {
    if (ctx.depleted) continue;
    const PhaseResult& pr = phase_.at(id);
    out.arrivals[id] = pr.arrival_s;
    out.uplink_samples[id] = pr.link;
    out.compute_s[id] = compute_time(ctx);
    state_.client_models[id] = pr.upload;
  }

  // Aggregation in fixed client-id order keeps results independent of the
  // arrival permutation and worker layout.
  std::vector<std::string> sorted_activated = activated;
  std::sort(sorted_activated.begin(), sorted_activated.end());
  std::vector<Upload> incoming;
  incoming.reserve(sorted_activated.size());
  for (const std::string& id : sorted_activated) {
    const ClientCtx& ctx = clients_.at(id);
    incoming.push_back(Upload{id, task_.weights[static_cast<std::size_t>(ctx.task_index)],
                              phase_.at(id).upload});
  }
  state_.server_buffer =
      buffer_update(state_.server_buffer, state_.server_memory, incoming, cfg_.rule,
                    static_cast<int>(out.arrivals.size()), cfg_.running_avg_weight);
  check_finite(state_.server_buffer);
  state_.server_memory = state_.server_buffer;

  double duration = 0.0;
  for (const std::string& id : activated) {
    duration = std::max(duration, out.compute_s.at(id) + out.arrivals.at(id));
  }
  if (!dropped.empty()) duration = std::max(duration, cfg_.time_window_s);
  // A round with nothing scheduled still waits out the window, so the clock
  // keeps moving even when every client has retired.
  if (out.arrivals.empty()) duration = cfg_.time_window_s;
  out.round_duration_s = duration;

  charge_round(ledger_, out, topo_, wireless_, cfg_.qos, downlink_energy_j_);
  if (cfg_.enforce_battery) apply_battery(out);

  state_.clock_s += duration;
  state_.round_index += 1;
  return out;
}

void Engine::apply_battery(const RoundOutcome& outcome) {
  for (const auto& [id, arrival] : outcome.arrivals) {
    const AgentSpec& agent = topo_.agent(id);
    if (!agent.battery_j) continue;
    auto it = ledger_.energy_j.find(id);
    if (it != ledger_.energy_j.end() && it->second >= *agent.battery_j) {
      clients_.at(id).depleted = true;
    }
  }
}

RoundState Engine::async_step(const std::string& client_id) {
  if (cfg_.mode != Mode::async) fail(Errc::mode_mismatch, "async_step requires async mode");
  auto cit = clients_.find(client_id);
  if (cit == clients_.end()) fail(Errc::unknown_id, "no client '" + client_id + "'");
  ClientCtx& ctx = cit->second;
  if (ctx.depleted) {
    // Retired clients skip their turn; the round counter still advances so
    // the schedule keeps cycling.
    state_.round_index += 1;
    return state_;
  }
  PhaseResult& pr = phase_.at(client_id);

  pr.link = sample_link(*ctx.wireless, ctx.chan);
  pr.arrival_s = pr.link.total_time_s + ctx.backhaul_s;
  const bool delivered = pr.arrival_s <= cfg_.time_window_s;

  const std::vector<double> etas = step_sizes(state_.round_index, 1.0);
  const double eta = etas.empty() ? cfg_.lr.value(state_.round_index, 1.0) : etas.front();
  ModelVec local = local_sgd(state_.client_models.at(client_id), task_, ctx.task_index, etas,
                             cfg_.batch, ctx.train);
  if (cfg_.noise.active() && cfg_.noise.malicious_ids.count(client_id)) {
    local = inject_noise(local, cfg_.noise.mode, cfg_.noise.nis, ctx.noise);
  }
  pr.upload = local;

  RoundOutcome out;
  out.round_index = state_.round_index;
  out.epsilon_s = cfg_.time_window_s;
  out.eta_t = eta;
  out.arrivals[client_id] = pr.arrival_s;
  out.uplink_samples[client_id] = pr.link;
  out.compute_s[client_id] = compute_time(ctx);
  out.binder = "window";
  if (delivered) {
    // The single arriving upload folds into the buffer; the refreshed memory
    // goes back to this client only.
    const std::vector<Upload> incoming{
        Upload{client_id, task_.weights[static_cast<std::size_t>(ctx.task_index)], local}};
    state_.server_buffer = buffer_update(state_.server_buffer, state_.server_memory, incoming,
                                         cfg_.rule, static_cast<int>(clients_.size()),
                                         cfg_.running_avg_weight);
    check_finite(state_.server_buffer);
    state_.server_memory = state_.server_buffer;
    state_.client_models[client_id] = state_.server_memory;
    out.activated.push_back(client_id);
    out.r_t = 1.0;
    out.round_duration_s = out.compute_s.at(client_id) + pr.arrival_s;
  } else {
    // Upload missed the window; the client carries on from its own result.
    state_.client_models[client_id] = local;
    out.dropped.insert(client_id);
    out.empty_activation = true;
    out.round_duration_s = out.compute_s.at(client_id) + cfg_.time_window_s;
  }

  charge_round(ledger_, out, topo_, wireless_, cfg_.qos, downlink_energy_j_);
  if (cfg_.enforce_battery) apply_battery(out);
  state_.clock_s += out.round_duration_s;
  state_.round_index += 1;
  return state_;
}

SimulationReport Engine::run(const TerminationSpec& term) {
  term.validate();
  SimulationReport rep;
  rep.initial_loss = objective();
  const std::vector<std::string> ids = topo_.client_ids();
  std::optional<std::string> fired;
  for (;;) {
    const double loss = objective();
    fired = term.check(state_.round_index, state_.clock_s, ledger_.total_energy_j, loss);
    if (fired) break;

    const std::size_t qos_mark = ledger_.active_links_per_round.size();
    RoundOutcome outcome;
    if (cfg_.mode == Mode::sync) {
      outcome = run_round();
    } else {
      // Async clients take turns round-robin by id.
      async_step(ids[static_cast<std::size_t>(state_.round_index) % ids.size()]);
    }

    RoundRecord rec;
    rec.round = state_.round_index - 1;
    rec.clock_s = state_.clock_s;
    rec.loss = objective();
    if (cfg_.mode == Mode::sync) {
      rec.duration_s = outcome.round_duration_s;
      rec.n_activated = static_cast<int>(outcome.activated.size());
      rec.activated = outcome.activated;
      rec.dropped.assign(outcome.dropped.begin(), outcome.dropped.end());
      rec.r_t = outcome.r_t;
      rec.eta_t = outcome.eta_t;
      rec.binder = outcome.binder;
    }
    // Per-round QoS comes off the ledger tail so sync and async share a path.
    const double round_energy = ledger_.total_energy_j - rep.total_energy_j;
    rec.energy_j = round_energy;
    rep.total_energy_j = ledger_.total_energy_j;
    if (ledger_.active_links_per_round.size() > qos_mark) {
      rec.throughput_bps = ledger_.throughput_bps_per_round[qos_mark];
      if (cfg_.mode != Mode::sync) {
        rec.n_activated = ledger_.active_links_per_round[qos_mark];
        rec.duration_s = state_.clock_s - (rep.rounds.empty() ? 0.0 : rep.rounds.back().clock_s);
      }
    }
    rec.bits_attempted = ledger_.bits_attempted - rep.bits_attempted;
    rec.bits_delivered = ledger_.bits_delivered - rep.bits_delivered;
    rec.packets_lost = ledger_.packets_lost - rep.packets_lost;
    rep.bits_attempted = ledger_.bits_attempted;
    rep.bits_delivered = ledger_.bits_delivered;
    rep.packets_lost = ledger_.packets_lost;
    if (cfg_.track_model) rec.model = state_.server_memory.coords;
    rep.rounds.push_back(std::move(rec));
  }
  rep.fired_condition = *fired;
  rep.total_rounds = state_.round_index;
  rep.total_time_s = state_.clock_s;
  rep.total_energy_j = ledger_.total_energy_j;
  rep.final_loss = objective();
  rep.final_model = state_.server_memory.coords;
  rep.per_agent_energy_j = ledger_.energy_j;
  rep.bits_attempted = ledger_.bits_attempted;
  rep.bits_delivered = ledger_.bits_delivered;
  rep.packets_lost = ledger_.packets_lost;
  return rep;
}

}  // namespace wfl
