#include "wfl/config.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wfl/errors.hpp"

namespace wfl {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::config_error, std::string(what) + ": " + e.what());
  }
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& base_dir) {
  const json j = parse_json(text, "run config is not valid JSON");
  RunConfig cfg;

  if (!j.contains("seed") || !j.at("seed").is_number_unsigned()) {
    fail(Errc::config_error, "config requires an explicit unsigned 'seed'");
  }
  cfg.seed = j.at("seed").get<std::uint64_t>();

  if (j.contains("topology")) {
    cfg.topology_path = j.at("topology").get<std::string>();
    if (!base_dir.empty() && !fs::path(cfg.topology_path).is_absolute()) {
      cfg.topology_path = (fs::path(base_dir) / cfg.topology_path).string();
    }
  }
  cfg.workers = j.value("workers", 1);
  cfg.replicas = j.value("replicas", 1);
  cfg.analysis = j.value("analysis", false);
  cfg.out_dir = j.value("out", "");
  if (j.contains("w0")) cfg.w0 = j.at("w0").get<std::vector<double>>();

  if (j.contains("task")) {
    const json& t = j.at("task");
    cfg.task.kind = task_kind_from_string(t.value("kind", "ridge"));
    cfg.task.dim = t.value("dim", 2);
    cfg.task.n_samples = t.value("samples", 16);
    cfg.task.lambda = t.value("lambda", 0.1);
    cfg.task.label_noise = t.value("label_noise", 0.0);
    if (t.contains("w_true")) cfg.task.w_true = t.at("w_true").get<std::vector<double>>();
    if (t.contains("ratios")) cfg.task.ratios = t.at("ratios").get<std::vector<double>>();
    if (t.contains("dataset")) {
      cfg.task.dataset_path = t.at("dataset").get<std::string>();
      if (!base_dir.empty() && !fs::path(cfg.task.dataset_path).is_absolute()) {
        cfg.task.dataset_path = (fs::path(base_dir) / cfg.task.dataset_path).string();
      }
    }
  }

  if (j.contains("engine")) {
    const json& e = j.at("engine");
    cfg.engine.mode = mode_from_string(e.value("mode", "sync"));
    cfg.engine.time_window_s = e.value("epsilon_s", 1.0);
    cfg.engine.e_local = e.value("e_local", 1);
    cfg.engine.batch = e.value("batch", 1);
    cfg.engine.rule = agg_rule_from_string(e.value("aggregation", "fedavg-partial"));
    cfg.engine.running_avg_weight = e.value("running_avg_weight", 0.5);
    if (e.contains("max_responses")) cfg.engine.max_responses = e.at("max_responses").get<int>();
    cfg.engine.qos.dropped_full_airtime = e.value("dropped_full_airtime", true);
    cfg.engine.qos.charge_downlink = e.value("charge_downlink", true);
    cfg.engine.enforce_battery = e.value("enforce_battery", false);
    if (e.contains("lr")) {
      const json& lr = e.at("lr");
      const std::string kind = lr.value("kind", "fixed");
      if (kind == "fixed") {
        cfg.engine.lr.kind = LrSpec::Kind::fixed;
        cfg.engine.lr.eta = lr.value("eta", 0.1);
      } else if (kind == "diminishing") {
        cfg.engine.lr.kind = LrSpec::Kind::diminishing;
        cfg.engine.lr.mu = lr.value("mu", 0.0);      // 0 = derive from the task
        cfg.engine.lr.gamma = lr.value("gamma", 0.0);
      } else {
        fail(Errc::config_error, "lr kind must be 'fixed' or 'diminishing'");
      }
      cfg.engine.lr.scale_by_participation = lr.value("scale_by_participation", false);
      cfg.engine.lr.per_step = lr.value("per_step", false);
    }
    if (e.contains("noise")) {
      const json& n = e.at("noise");
      cfg.engine.noise.mode = noise_mode_from_string(n.value("mode", "none"));
      cfg.engine.noise.nis = n.value("nis", 0.0);
      if (n.contains("malicious")) {
        for (const auto& id : n.at("malicious")) {
          cfg.engine.noise.malicious_ids.insert(id.get<std::string>());
        }
      }
    }
  }

  if (j.contains("termination")) {
    const json& t = j.at("termination");
    if (t.contains("max_rounds")) cfg.termination.max_rounds = t.at("max_rounds").get<long>();
    if (t.contains("max_sim_time_s")) {
      cfg.termination.max_sim_time_s = t.at("max_sim_time_s").get<double>();
    }
    if (t.contains("max_energy_j")) {
      cfg.termination.max_energy_j = t.at("max_energy_j").get<double>();
    }
    if (t.contains("target")) {
      TerminationSpec::Target tgt;
      tgt.metric = t.at("target").value("metric", "loss");
      tgt.cmp = t.at("target").value("cmp", "<=");
      tgt.value = t.at("target").at("value").get<double>();
      cfg.termination.target = tgt;
    }
  }

  cfg.validate();
  return cfg;
}

RunConfig RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str(), fs::path(path).parent_path().string());
}

void RunConfig::validate() const {
  if (topology_inline.empty()) {
    if (topology_path.empty()) fail(Errc::config_error, "config names no topology");
    if (!fs::exists(topology_path)) {
      fail(Errc::io_error, "topology file '" + topology_path + "' does not exist");
    }
  }
  if (!task.dataset_path.empty() && !fs::exists(task.dataset_path)) {
    fail(Errc::io_error, "dataset file '" + task.dataset_path + "' does not exist");
  }
  if (workers < 1) fail(Errc::config_error, "workers must be >= 1");
  if (replicas < 1) fail(Errc::config_error, "replicas must be >= 1");
  termination.validate();
}

}  // namespace wfl
