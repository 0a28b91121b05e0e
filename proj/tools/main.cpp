// Batch front-end: run simulations, parameter sweeps, and bound analysis
// from JSON configs. Exit codes: 0 success, 2 config/document error,
// 3 runtime error, 4 analyze verdict failed.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wfl/config.hpp"
#include "wfl/errors.hpp"
#include "wfl/runner.hpp"
#include "wfl/sweep.hpp"
#include "wfl/topology.hpp"

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitVerdict = 4;

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) wfl::fail(wfl::Errc::io_error, "cannot write '" + path.string() + "'");
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) wfl::fail(wfl::Errc::io_error, "cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string replica_name(int i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "replica_%03d.jsonl", i);
  return buf;
}

struct CommonOpts {
  std::string config_path;
  std::string topology_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int workers = 0;
  int replicas = 0;
  bool enforce_battery = false;
};

wfl::RunConfig load_config(const CommonOpts& opts) {
  wfl::RunConfig cfg = wfl::RunConfig::load_file(opts.config_path);
  if (!opts.topology_path.empty()) cfg.topology_path = opts.topology_path;
  if (opts.seed_set) cfg.seed = opts.seed;
  // worker precedence: --workers flag, then WFLSIM_WORKERS, then the config
  if (opts.workers > 0) {
    cfg.workers = opts.workers;
  } else if (const char* env = std::getenv("WFLSIM_WORKERS")) {
    try {
      cfg.workers = std::stoi(env);
    } catch (const std::exception&) {
      wfl::fail(wfl::Errc::config_error, "WFLSIM_WORKERS is not an integer");
    }
  }
  if (opts.replicas > 0) cfg.replicas = opts.replicas;
  if (!opts.out_dir.empty()) cfg.out_dir = opts.out_dir;
  if (opts.enforce_battery) cfg.engine.enforce_battery = true;
  cfg.validate();
  return cfg;
}

json summary_json(const wfl::RunArtifacts& art) {
  const wfl::SimulationReport& rep = art.reports.front();
  json s;
  s["fired_condition"] = rep.fired_condition;
  s["replicas"] = art.reports.size();
  s["total_rounds"] = rep.total_rounds;
  s["total_time_s"] = rep.total_time_s;
  s["total_energy_j"] = rep.total_energy_j;
  s["initial_loss"] = rep.initial_loss;
  s["final_loss"] = rep.final_loss;
  s["per_agent_energy_j"] = rep.per_agent_energy_j;
  s["bits_attempted"] = rep.bits_attempted;
  s["bits_delivered"] = rep.bits_delivered;
  s["packets_lost"] = rep.packets_lost;
  return s;
}

int cmd_run(const CommonOpts& opts) {
  wfl::RunConfig cfg = load_config(opts);
  if (cfg.out_dir.empty()) wfl::fail(wfl::Errc::config_error, "run needs an output directory");
  const wfl::RunArtifacts art = wfl::run_simulation(cfg);
  const fs::path out(cfg.out_dir);
  for (std::size_t i = 0; i < art.reports.size(); ++i) {
    write_file(out / replica_name(static_cast<int>(i)), art.reports[i].to_jsonl());
  }
  write_file(out / "dataset.tsv", art.dataset_tsv);
  write_file(out / "summary.json", summary_json(art).dump(2) + "\n");
  std::cout << "run finished: " << art.reports.front().fired_condition << ", reports in "
            << out.string() << "\n";
  return kExitOk;
}

int cmd_sweep(const CommonOpts& opts, const std::string& sweep_path) {
  wfl::RunConfig base = load_config(opts);
  if (base.out_dir.empty()) wfl::fail(wfl::Errc::config_error, "sweep needs an output directory");
  const wfl::SweepSpec spec = wfl::SweepSpec::load_file(sweep_path);
  const wfl::SweepResult result = wfl::run_sweep(base, spec);
  const fs::path out(base.out_dir);
  for (std::size_t i = 0; i < result.runs.size(); ++i) {
    char dir[32];
    std::snprintf(dir, sizeof dir, "point_%03zu", i);
    const fs::path pdir = out / dir;
    for (std::size_t r = 0; r < result.runs[i].reports.size(); ++r) {
      write_file(pdir / replica_name(static_cast<int>(r)), result.runs[i].reports[r].to_jsonl());
    }
    write_file(pdir / "summary.json", summary_json(result.runs[i]).dump(2) + "\n");
  }
  write_file(out / "sweep.csv", result.to_csv());
  std::cout << "sweep finished: " << result.points.size() << " grid points, table in "
            << (out / "sweep.csv").string() << "\n";
  return kExitOk;
}

int cmd_analyze(const CommonOpts& opts, const std::string& report_dir,
                const std::string& trace_out) {
  wfl::RunConfig cfg = load_config(opts);
  const fs::path dir(report_dir);
  // The committed dataset pins the task the reports were produced with.
  if (fs::exists(dir / "dataset.tsv")) {
    cfg.task.dataset_path = (dir / "dataset.tsv").string();
  }
  std::vector<wfl::SimulationReport> reports;
  for (int i = 0;; ++i) {
    const fs::path p = dir / replica_name(i);
    if (!fs::exists(p)) break;
    reports.push_back(wfl::SimulationReport::from_jsonl(read_file(p)));
  }
  if (reports.size() < 2) {
    wfl::fail(wfl::Errc::insufficient_replicas,
              "analyze needs >= 2 replica reports, found " + std::to_string(reports.size()));
  }

  // Rebuild the task and constants exactly as the run did, then swap in the
  // on-disk reports.
  cfg.analysis = true;
  cfg.replicas = 1;
  cfg.termination = wfl::TerminationSpec{};
  cfg.termination.max_rounds = 0;
  wfl::RunArtifacts art = wfl::run_simulation(cfg);
  const wfl::BoundTrace trace =
      wfl::build_trace(art.task, art.optima, art.params, reports, cfg.w0);
  const wfl::Lemma1Result lemma1 =
      wfl::lemma1_check(trace, art.params, wfl::c_sequence(art.params, trace));

  int theorem_violations = 0;
  for (std::size_t t = 0; t < trace.gap.size(); ++t) {
    if (trace.gap[t] > trace.bound[t] + 3.0 * trace.gap_se[t]) ++theorem_violations;
  }

  const fs::path trace_path = trace_out.empty() ? dir / "trace.json" : fs::path(trace_out);
  write_file(trace_path, trace.to_json());

  std::cout << "lemma1: " << (lemma1.violations == 0 ? "PASS" : "FAIL") << " ("
            << lemma1.violations << "/" << lemma1.holds.size() << " violations)\n";
  std::cout << "theorem: " << (theorem_violations == 0 ? "PASS" : "FAIL") << " ("
            << theorem_violations << "/" << trace.gap.size() << " violations)\n";
  std::cout << "trace written to " << trace_path.string() << "\n";
  return (lemma1.violations == 0 && theorem_violations == 0) ? kExitOk : kExitVerdict;
}

int cmd_validate_topology(const std::string& path) {
  const wfl::Topology topo = wfl::Topology::parse_file(path);
  std::cout << "ok: " << topo.agents().size() << " agents, " << topo.cells().size()
            << " cells, server '" << topo.server_id() << "', " << topo.client_ids().size()
            << " clients\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event simulator of federated averaging over stochastic wireless uplinks"};
  app.require_subcommand(1);

  CommonOpts opts;
  std::string sweep_path, report_dir, trace_out, topo_path;

  auto add_common = [&opts](CLI::App* cmd, bool needs_config) {
    cmd->add_option("--config", opts.config_path, "run config JSON")->required(needs_config);
    cmd->add_option("--topology", opts.topology_path, "override topology path");
    cmd->add_option("--seed", opts.seed, "override master seed")
        ->each([&opts](const std::string&) { opts.seed_set = true; });
    cmd->add_option("--workers", opts.workers, "override worker count");
    cmd->add_option("--replicas", opts.replicas, "override replica count");
    cmd->add_option("--out", opts.out_dir, "output directory");
    cmd->add_flag("--enforce-battery", opts.enforce_battery, "stop agents at zero battery");
  };

  CLI::App* run = app.add_subcommand("run", "run one simulation config");
  add_common(run, true);
  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep");
  add_common(sweep, true);
  sweep->add_option("--sweep", sweep_path, "sweep spec JSON")->required();
  CLI::App* analyze = app.add_subcommand("analyze", "bound checks over replica reports");
  add_common(analyze, true);
  analyze->add_option("--report", report_dir, "directory with replica reports")->required();
  analyze->add_option("--trace-out", trace_out, "trace output path");
  CLI::App* validate = app.add_subcommand("validate-topology", "parse and validate a topology");
  validate->add_option("--topology", topo_path, "topology JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(opts);
    if (sweep->parsed()) return cmd_sweep(opts, sweep_path);
    if (analyze->parsed()) return cmd_analyze(opts, report_dir, trace_out);
    if (validate->parsed()) return cmd_validate_topology(topo_path);
  } catch (const wfl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return wfl::is_config_error(e.code()) ? kExitConfig : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitOk;
}
