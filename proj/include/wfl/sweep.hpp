#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wfl/config.hpp"
#include "wfl/runner.hpp"

namespace wfl {

// Cross-product sweep over a fixed set of knobs. Thresholds list the loss
// levels whose first-crossing cost the consolidated table reports.
struct SweepSpec {
  std::vector<double> per;
  std::vector<int> e_local;
  std::vector<int> batch;
  std::vector<double> epsilon_s;
  std::vector<std::vector<double>> ratios;
  std::vector<double> thresholds;

  static SweepSpec from_json_text(const std::string& text);
  static SweepSpec load_file(const std::string& path);
};

struct SweepPoint {
  std::optional<double> per;
  std::optional<int> e_local;
  std::optional<int> batch;
  std::optional<double> epsilon_s;
  std::optional<std::vector<double>> ratios;

  std::string label() const;
  RunConfig apply(const RunConfig& base) const;
};

struct SweepRow {
  std::size_t point = 0;
  std::string label;
  double threshold = 0.0;
  long rounds = 0;       // first round whose loss crossed the threshold
  double time_s = 0.0;   // cumulative clock at that round
  double energy_j = 0.0;
  bool reached = false;
};

struct SweepResult {
  std::vector<SweepPoint> points;
  std::vector<SweepRow> rows;  // ladder-deduplicated
  std::vector<RunArtifacts> runs;

  std::string to_csv() const;
};

std::vector<SweepPoint> expand_grid(const SweepSpec& spec);
SweepResult run_sweep(const RunConfig& base, const SweepSpec& spec);

}  // namespace wfl
