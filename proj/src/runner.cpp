#include "wfl/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wfl/engine.hpp"
#include "wfl/errors.hpp"
#include "wfl/exec.hpp"

namespace wfl {

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

RunArtifacts run_simulation(const RunConfig& cfg) {
  cfg.validate();
  RngStream master(cfg.seed);
  RunArtifacts art;
  art.topology = cfg.topology_inline.empty() ? Topology::parse_file(cfg.topology_path)
                                             : Topology::parse(cfg.topology_inline);
  const std::vector<std::string> clients = art.topology.client_ids();
  if (clients.empty()) fail(Errc::config_error, "topology has no clients");

  // Task data: an explicit dataset file wins; otherwise generate and
  // partition synthetically from dedicated streams.
  std::vector<ClientData> per_client;
  if (!cfg.task.dataset_path.empty()) {
    per_client = dataset_from_tsv(read_text(cfg.task.dataset_path));
    if (per_client.size() != clients.size()) {
      fail(Errc::replica_mismatch, "dataset holds " + std::to_string(per_client.size()) +
                                       " clients, topology " + std::to_string(clients.size()));
    }
  } else {
    SyntheticSpec spec;
    spec.kind = cfg.task.kind;
    spec.dim = cfg.task.dim;
    spec.n_samples = cfg.task.n_samples;
    spec.label_noise = cfg.task.label_noise;
    spec.w_true = cfg.task.w_true;
    RngStream data_rng = master.derive("data");
    const ClientData samples = generate_dataset(spec, data_rng);
    std::vector<double> ratios = cfg.task.ratios;
    if (ratios.empty()) ratios.assign(clients.size(), 1.0);
    if (ratios.size() != clients.size()) {
      fail(Errc::config_error, "partition ratios count != client count");
    }
    RngStream part_rng = master.derive("partition");
    per_client = partition_dataset(samples, ratios, part_rng);
  }
  art.dataset_tsv = dataset_to_tsv(per_client);

  art.task.kind = cfg.task.kind;
  art.task.lambda = cfg.task.lambda;
  art.task.dim = cfg.task.dim;
  art.task.data = std::move(per_client);
  art.task.weights = weights_from_sizes(art.task.data);
  art.task.validate();

  ModelVec w0(static_cast<std::size_t>(cfg.task.dim), 0.0);
  if (!cfg.w0.empty()) {
    if (static_cast<int>(cfg.w0.size()) != cfg.task.dim) {
      fail(Errc::config_error, "w0 dim != task dim");
    }
    w0 = ModelVec(cfg.w0);
  }

  EngineConfig engine_cfg = cfg.engine;
  engine_cfg.track_model = engine_cfg.track_model || cfg.analysis;

  const bool needs_params =
      cfg.analysis || (engine_cfg.lr.kind == LrSpec::Kind::diminishing &&
                       (engine_cfg.lr.mu <= 0.0 || engine_cfg.lr.gamma <= 0.0));
  if (needs_params) {
    art.optima = solve_optima(art.task);
    ProbeSpec probe;
    probe.center = art.optima.w_star;
    probe.radius = std::sqrt(l2_dist_sq(w0, art.optima.w_star));
    if (probe.radius == 0.0) probe.radius = 1.0;
    probe.batch = engine_cfg.batch;
    probe.e_local = engine_cfg.e_local;
    RngStream probe_rng = master.derive("probe");
    art.params = estimate_constants(art.task, probe, probe_rng);
    art.has_params = true;
    if (engine_cfg.lr.kind == LrSpec::Kind::diminishing) {
      if (engine_cfg.lr.mu <= 0.0) engine_cfg.lr.mu = art.params.mu;
      if (engine_cfg.lr.gamma <= 0.0) engine_cfg.lr.gamma = art.params.gamma;
    }
  }

  const WorkerPlan plan = plan_partition(art.topology, cfg.workers);
  for (int rep = 0; rep < cfg.replicas; ++rep) {
    Engine engine(art.topology, art.task, engine_cfg, master.derive("replica", rep), plan);
    engine.set_initial_model(w0);
    art.reports.push_back(engine.run(cfg.termination));
  }
  return art;
}

RunArtifacts run_parallel(const RunConfig& cfg, int n_workers) {
  RunConfig parallel = cfg;
  parallel.workers = n_workers;
  return run_simulation(parallel);
}

BoundTrace build_trace(const ConvexTask& task, const TaskOptima& optima,
                       const ConvergenceParams& params,
                       const std::vector<SimulationReport>& reports,
                       const std::vector<double>& w0_coords) {
  if (reports.empty()) fail(Errc::insufficient_replicas, "no reports");
  const std::size_t rounds = reports[0].rounds.size();
  for (const SimulationReport& r : reports) {
    if (r.rounds.size() != rounds) {
      fail(Errc::replica_mismatch, "replica reports differ in round count");
    }
    for (const RoundRecord& rec : r.rounds) {
      if (rec.model.empty()) {
        fail(Errc::replica_mismatch, "report lacks per-round models (run with analysis on)");
      }
    }
  }
  ModelVec w0(w0_coords.empty() ? std::vector<double>(optima.w_star.dim(), 0.0) : w0_coords);

  BoundTrace trace;
  trace.replicas = static_cast<int>(reports.size());
  const std::size_t n_rep = reports.size();
  const double f_star = optima.f_star;

  for (std::size_t t = 0; t <= rounds; ++t) {
    std::vector<double> dists, gaps;
    dists.reserve(n_rep);
    gaps.reserve(n_rep);
    double r_sum = 0.0;
    double eta_sum = 0.0;
    for (const SimulationReport& rep : reports) {
      const ModelVec w = t == 0 ? w0 : ModelVec(rep.rounds[t - 1].model);
      dists.push_back(l2_dist_sq(w, optima.w_star));
      gaps.push_back(task.value(w) - f_star);
      if (t < rounds) {
        r_sum += rep.rounds[t].r_t;
        eta_sum += rep.rounds[t].eta_t;
      }
    }
    auto mean_se = [n_rep](const std::vector<double>& xs) {
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(n_rep);
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      const double se =
          n_rep > 1 ? std::sqrt(var / static_cast<double>(n_rep - 1) / static_cast<double>(n_rep))
                    : 0.0;
      return std::pair<double, double>{mean, se};
    };
    const auto [dm, dse] = mean_se(dists);
    const auto [gm, gse] = mean_se(gaps);
    trace.delta.push_back(dm);
    trace.delta_se.push_back(dse);
    trace.gap.push_back(gm);
    trace.gap_se.push_back(gse);
    trace.bound.push_back(theorem_bound(params, static_cast<long>(t), trace.delta[0]));
    if (t < rounds) {
      trace.r_t.push_back(r_sum / static_cast<double>(n_rep));
      trace.eta_t.push_back(eta_sum / static_cast<double>(n_rep));
    }
  }

  const std::vector<double> cs = c_sequence(params, trace);
  trace.delta_sup = supremum_recursion(trace.delta[0], params.mu, compute_B(params), cs,
                                       static_cast<int>(rounds));
  return trace;
}

std::vector<double> c_sequence(const ConvergenceParams& params, const BoundTrace& trace) {
  std::vector<double> cs;
  cs.reserve(trace.r_t.size());
  for (double r : trace.r_t) {
    if (r >= 1.0 || params.n_clients == 1) {
      cs.push_back(0.0);
    } else {
      const int n_tilde = std::max(
          1, static_cast<int>(std::lround(r * static_cast<double>(params.n_clients))));
      cs.push_back(compute_C(params, std::min(n_tilde, params.n_clients)));
    }
  }
  return cs;
}

}  // namespace wfl
