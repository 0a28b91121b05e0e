#pragma once

#include <string>
#include <vector>

#include "wfl/analysis.hpp"
#include "wfl/config.hpp"
#include "wfl/report.hpp"
#include "wfl/topology.hpp"

namespace wfl {

// Everything a config run produces. The dataset text is written alongside
// the reports so an analyze pass can rebuild the identical task.
struct RunArtifacts {
  Topology topology;
  ConvexTask task;
  std::string dataset_tsv;
  bool has_params = false;
  TaskOptima optima;
  ConvergenceParams params;
  std::vector<SimulationReport> reports;  // one per replica
};

// Build the topology/task/engine from a config and run every replica.
// Replica i draws from streams keyed by (seed, "replica", i); the dataset and
// partition are shared by all replicas.
RunArtifacts run_simulation(const RunConfig& cfg);

// Same run under an explicit worker plan. Client RNG streams are keyed by
// client id, so the report is bit-identical for every plan.
RunArtifacts run_parallel(const RunConfig& cfg, int n_workers);

// Replica-mean distance/gap series plus the per-round theorem bound.
BoundTrace build_trace(const ConvexTask& task, const TaskOptima& optima,
                       const ConvergenceParams& params,
                       const std::vector<SimulationReport>& reports,
                       const std::vector<double>& w0);

// Per-round C_t sequence matching a trace's mean participation (0 for full
// participation rounds).
std::vector<double> c_sequence(const ConvergenceParams& params, const BoundTrace& trace);

}  // namespace wfl
