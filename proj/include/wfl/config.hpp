#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wfl/engine.hpp"
#include "wfl/task.hpp"

namespace wfl {

struct TaskSpec {
  TaskKind kind = TaskKind::ridge;
  int dim = 2;
  int n_samples = 16;
  double lambda = 0.1;
  double label_noise = 0.0;
  std::vector<double> w_true;   // synthetic ground truth (ones when empty)
  std::vector<double> ratios;   // partition ratios (uniform when empty)
  std::string dataset_path;     // columnar text file; overrides the generator
};

// Batch run description. Seeds are mandatory: outputs must be a pure
// function of (config, seed).
struct RunConfig {
  std::string topology_path;
  std::string topology_inline;  // overrides topology_path when non-empty
  std::uint64_t seed = 0;
  int workers = 1;
  int replicas = 1;
  TaskSpec task;
  EngineConfig engine;
  TerminationSpec termination;
  bool analysis = false;  // track per-round models for bound checks
  std::vector<double> w0;  // initial model (zeros when empty)
  std::string out_dir;

  static RunConfig from_json_text(const std::string& text, const std::string& base_dir = "");
  static RunConfig load_file(const std::string& path);
  void validate() const;
};

}  // namespace wfl
