#include "wfl/sweep.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "wfl/errors.hpp"

namespace wfl {

using nlohmann::json;

SweepSpec SweepSpec::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::config_error, std::string("sweep spec is not valid JSON: ") + e.what());
  }
  SweepSpec spec;
  for (const auto& [key, value] : j.items()) {
    if (key == "per") {
      spec.per = value.get<std::vector<double>>();
    } else if (key == "e_local") {
      spec.e_local = value.get<std::vector<int>>();
    } else if (key == "batch") {
      spec.batch = value.get<std::vector<int>>();
    } else if (key == "epsilon_s") {
      spec.epsilon_s = value.get<std::vector<double>>();
    } else if (key == "ratios") {
      spec.ratios = value.get<std::vector<std::vector<double>>>();
    } else if (key == "thresholds") {
      spec.thresholds = value.get<std::vector<double>>();
    } else {
      fail(Errc::invalid_parameter, "unknown sweep parameter '" + key + "'");
    }
  }
  return spec;
}

SweepSpec SweepSpec::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open sweep spec '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json_text(buf.str());
}

std::string SweepPoint::label() const {
  std::ostringstream os;
  bool first = true;
  auto field = [&](const std::string& name, const std::string& value) {
    if (!first) os << ",";
    os << name << "=" << value;
    first = false;
  };
  if (per) field("per", std::to_string(*per));
  if (e_local) field("e_local", std::to_string(*e_local));
  if (batch) field("batch", std::to_string(*batch));
  if (epsilon_s) field("epsilon_s", std::to_string(*epsilon_s));
  if (ratios) {
    std::ostringstream r;
    for (std::size_t i = 0; i < ratios->size(); ++i) r << (i ? ":" : "") << (*ratios)[i];
    field("ratios", r.str());
  }
  if (first) os << "baseline";
  return os.str();
}

namespace {

// Override the packet error rate on every wireless edge of the document.
std::string topology_with_per(const std::string& text, double per) {
  json doc = json::parse(text);
  for (auto& [id, agent] : doc.items()) {
    if (!agent.contains("adj")) continue;
    for (auto& [nbr, edge] : agent.at("adj").items()) {
      if (edge.contains("channel")) edge.at("channel")["per"] = per;
    }
  }
  return doc.dump();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

RunConfig SweepPoint::apply(const RunConfig& base) const {
  RunConfig cfg = base;
  if (per) {
    const std::string text =
        cfg.topology_inline.empty() ? read_text(cfg.topology_path) : cfg.topology_inline;
    cfg.topology_inline = topology_with_per(text, *per);
  }
  if (e_local) cfg.engine.e_local = *e_local;
  if (batch) cfg.engine.batch = *batch;
  if (epsilon_s) cfg.engine.time_window_s = *epsilon_s;
  if (ratios) cfg.task.ratios = *ratios;
  return cfg;
}

std::vector<SweepPoint> expand_grid(const SweepSpec& spec) {
  std::vector<SweepPoint> points{SweepPoint{}};
  auto cross = [&points](auto&& values, auto&& assign) {
    if (values.empty()) return;
    std::vector<SweepPoint> next;
    next.reserve(points.size() * values.size());
    for (const SweepPoint& p : points) {
      for (const auto& v : values) {
        SweepPoint q = p;
        assign(q, v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  };
  cross(spec.per, [](SweepPoint& p, double v) { p.per = v; });
  cross(spec.e_local, [](SweepPoint& p, int v) { p.e_local = v; });
  cross(spec.batch, [](SweepPoint& p, int v) { p.batch = v; });
  cross(spec.epsilon_s, [](SweepPoint& p, double v) { p.epsilon_s = v; });
  cross(spec.ratios, [](SweepPoint& p, const std::vector<double>& v) { p.ratios = v; });
  return points;
}

SweepResult run_sweep(const RunConfig& base, const SweepSpec& spec) {
  SweepResult result;
  result.points = expand_grid(spec);
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    const RunConfig cfg = result.points[i].apply(base);
    RunArtifacts art = run_simulation(cfg);
    const SimulationReport& rep = art.reports.front();

    // First-crossing cost per threshold; a repeated energy value between
    // consecutive thresholds keeps only its first row (the "ladder" rule).
    bool have_prev = false;
    double prev_energy = 0.0;
    for (double threshold : spec.thresholds) {
      SweepRow row;
      row.point = i;
      row.label = result.points[i].label();
      row.threshold = threshold;
      double cum_energy = 0.0;
      for (const RoundRecord& rec : rep.rounds) {
        cum_energy += rec.energy_j;
        if (rec.loss <= threshold) {
          row.reached = true;
          row.rounds = rec.round + 1;
          row.time_s = rec.clock_s;
          row.energy_j = cum_energy;
          break;
        }
      }
      if (row.reached && have_prev && row.energy_j == prev_energy) continue;
      if (row.reached) {
        prev_energy = row.energy_j;
        have_prev = true;
      }
      result.rows.push_back(std::move(row));
    }
    result.runs.push_back(std::move(art));
  }
  return result;
}

std::string SweepResult::to_csv() const {
  std::ostringstream os;
  os << "point,label,threshold,reached,rounds,time_s,energy_j\n";
  os.precision(17);
  for (const SweepRow& r : rows) {
    os << r.point << ",\"" << r.label << "\"," << r.threshold << "," << (r.reached ? 1 : 0) << ","
       << r.rounds << "," << r.time_s << "," << r.energy_j << "\n";
  }
  return os.str();
}

}  // namespace wfl
