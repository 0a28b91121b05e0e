#include "wfl/task.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "wfl/errors.hpp"

namespace wfl {

namespace {

// log(1 + exp(t)) without overflow
double log1pexp(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "ridge") return TaskKind::ridge;
  if (s == "logistic") return TaskKind::logistic;
  fail(Errc::unsupported_task, "unknown task kind '" + s + "'");
}

std::string to_string(TaskKind k) { return k == TaskKind::ridge ? "ridge" : "logistic"; }

void ConvexTask::validate() const {
  if (dim <= 0) fail(Errc::malformed_attribute, "task dim must be positive");
  if (lambda < 0) fail(Errc::malformed_attribute, "lambda must be nonnegative");
  if (data.empty()) fail(Errc::empty_dataset, "task has no clients");
  if (weights.size() != data.size()) {
    fail(Errc::dimension_mismatch, "weights/client count mismatch");
  }
  double sum = 0.0;
  for (double p : weights) {
    if (p < 0.0) fail(Errc::probability_out_of_range, "client weight must be nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    fail(Errc::inconsistent_inputs, "client weights sum to " + std::to_string(sum));
  }
  for (const auto& client : data) {
    for (const auto& s : client) {
      if (static_cast<int>(s.x.size()) != dim) {
        fail(Errc::dimension_mismatch, "sample feature dim differs from task dim");
      }
    }
  }
}

double ConvexTask::value_client(int k, const ModelVec& w) const {
  if (static_cast<int>(w.dim()) != dim) fail(Errc::dimension_mismatch, "model dim != task dim");
  const ClientData& cd = data.at(static_cast<std::size_t>(k));
  double loss = 0.0;
  for (const Sample& s : cd) {
    double margin = 0.0;
    for (int i = 0; i < dim; ++i) margin += s.x[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
    if (kind == TaskKind::ridge) {
      const double r = margin - s.y;
      loss += 0.5 * r * r;
    } else {
      loss += log1pexp(-s.y * margin);
    }
  }
  if (!cd.empty()) loss /= static_cast<double>(cd.size());
  return loss + 0.5 * lambda * l2_norm_sq(w);
}

double ConvexTask::value(const ModelVec& w) const {
  double v = 0.0;
  for (int k = 0; k < n_clients(); ++k) v += weights[static_cast<std::size_t>(k)] * value_client(k, w);
  return v;
}

ModelVec ConvexTask::grad_client(int k, const ModelVec& w) const {
  if (static_cast<int>(w.dim()) != dim) fail(Errc::dimension_mismatch, "model dim != task dim");
  const ClientData& cd = data.at(static_cast<std::size_t>(k));
  ModelVec g(static_cast<std::size_t>(dim), 0.0);
  for (const Sample& s : cd) {
    double margin = 0.0;
    for (int i = 0; i < dim; ++i) margin += s.x[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
    const double coeff = kind == TaskKind::ridge ? (margin - s.y) : (-s.y * sigmoid(-s.y * margin));
    for (int i = 0; i < dim; ++i) g.coords[static_cast<std::size_t>(i)] += coeff * s.x[static_cast<std::size_t>(i)];
  }
  if (!cd.empty()) scale(g, 1.0 / static_cast<double>(cd.size()));
  axpy(lambda, w, g);
  return g;
}

ModelVec ConvexTask::grad(const ModelVec& w) const {
  ModelVec g(static_cast<std::size_t>(dim), 0.0);
  for (int k = 0; k < n_clients(); ++k) {
    axpy(weights[static_cast<std::size_t>(k)], grad_client(k, w), g);
  }
  return g;
}

ModelVec ConvexTask::grad_minibatch(int k, const ModelVec& w, int batch, RngStream& rng) const {
  if (static_cast<int>(w.dim()) != dim) fail(Errc::dimension_mismatch, "model dim != task dim");
  const ClientData& cd = data.at(static_cast<std::size_t>(k));
  if (cd.empty()) {
    // Degenerate client: the stochastic objective is the regularizer alone.
    ModelVec g(static_cast<std::size_t>(dim), 0.0);
    axpy(lambda, w, g);
    return g;
  }
  if (batch < 1) fail(Errc::invalid_parameter, "batch must be >= 1");
  if (batch > static_cast<int>(cd.size())) {
    fail(Errc::batch_too_large, "batch " + std::to_string(batch) + " exceeds client samples " +
                                    std::to_string(cd.size()));
  }
  ModelVec g(static_cast<std::size_t>(dim), 0.0);
  for (int b = 0; b < batch; ++b) {
    const Sample& s = cd[rng.below(cd.size())];
    double margin = 0.0;
    for (int i = 0; i < dim; ++i) margin += s.x[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
    const double coeff = kind == TaskKind::ridge ? (margin - s.y) : (-s.y * sigmoid(-s.y * margin));
    for (int i = 0; i < dim; ++i) g.coords[static_cast<std::size_t>(i)] += coeff * s.x[static_cast<std::size_t>(i)];
  }
  scale(g, 1.0 / static_cast<double>(batch));
  axpy(lambda, w, g);
  return g;
}

std::vector<double> weights_from_sizes(const std::vector<ClientData>& data) {
  std::vector<double> w(data.size(), 0.0);
  std::size_t total = 0;
  for (const auto& cd : data) total += cd.size();
  if (total == 0) {
    std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(data.size()));
    return w;
  }
  for (std::size_t k = 0; k < data.size(); ++k) {
    w[k] = static_cast<double>(data[k].size()) / static_cast<double>(total);
  }
  return w;
}

std::vector<ClientData> partition_dataset(const ClientData& samples,
                                          const std::vector<double>& ratios, RngStream& rng) {
  if (samples.empty()) fail(Errc::empty_dataset, "cannot partition an empty dataset");
  if (ratios.empty()) fail(Errc::invalid_parameter, "ratios must be non-empty");
  if (ratios.size() > samples.size()) {
    fail(Errc::invalid_parameter, "more clients than samples: " + std::to_string(ratios.size()) +
                                      " > " + std::to_string(samples.size()));
  }
  double ratio_sum = 0.0;
  for (double r : ratios) {
    if (r <= 0.0) fail(Errc::invalid_parameter, "partition ratios must be positive");
    ratio_sum += r;
  }

  // Fisher-Yates shuffle of sample indices
  std::vector<std::size_t> order(samples.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }

  // Largest-remainder apportionment; remainder ties go to the lower index.
  const std::size_t n = samples.size();
  std::vector<std::size_t> sizes(ratios.size(), 0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    const double quota = static_cast<double>(n) * ratios[k] / ratio_sum;
    sizes[k] = static_cast<std::size_t>(std::floor(quota));
    assigned += sizes[k];
    remainders.emplace_back(quota - std::floor(quota), k);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) {
    sizes[remainders[i % remainders.size()].second] += 1;
  }

  std::vector<ClientData> out(ratios.size());
  std::size_t pos = 0;
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    out[k].reserve(sizes[k]);
    for (std::size_t j = 0; j < sizes[k]; ++j) out[k].push_back(samples[order[pos++]]);
  }
  return out;
}

ClientData generate_dataset(const SyntheticSpec& spec, RngStream& rng) {
  if (spec.dim <= 0 || spec.n_samples <= 0) {
    fail(Errc::invalid_parameter, "synthetic spec needs positive dim and sample count");
  }
  std::vector<double> w_true = spec.w_true;
  if (w_true.empty()) w_true.assign(static_cast<std::size_t>(spec.dim), 1.0);
  if (static_cast<int>(w_true.size()) != spec.dim) {
    fail(Errc::dimension_mismatch, "w_true dim differs from spec dim");
  }
  ClientData out;
  out.reserve(static_cast<std::size_t>(spec.n_samples));
  for (int j = 0; j < spec.n_samples; ++j) {
    Sample s;
    s.x.resize(static_cast<std::size_t>(spec.dim));
    double margin = 0.0;
    for (int i = 0; i < spec.dim; ++i) {
      s.x[static_cast<std::size_t>(i)] = rng.normal();
      margin += s.x[static_cast<std::size_t>(i)] * w_true[static_cast<std::size_t>(i)];
    }
    if (spec.label_noise > 0.0) margin += rng.normal(0.0, spec.label_noise);
    s.y = spec.kind == TaskKind::ridge ? margin : (margin >= 0.0 ? 1.0 : -1.0);
    out.push_back(std::move(s));
  }
  return out;
}

std::string dataset_to_tsv(const std::vector<ClientData>& per_client) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t k = 0; k < per_client.size(); ++k) {
    for (const Sample& s : per_client[k]) {
      os << k << '\t' << s.y;
      for (double x : s.x) os << '\t' << x;
      os << '\n';
    }
  }
  return os.str();
}

std::vector<ClientData> dataset_from_tsv(const std::string& text) {
  std::vector<ClientData> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t k = 0;
    Sample s;
    if (!(ls >> k >> s.y)) fail(Errc::io_error, "malformed dataset row: " + line);
    double x = 0.0;
    while (ls >> x) s.x.push_back(x);
    if (k >= out.size()) out.resize(k + 1);
    out[k].push_back(std::move(s));
  }
  if (out.empty()) fail(Errc::empty_dataset, "dataset text holds no rows");
  return out;
}

NoiseMode noise_mode_from_string(const std::string& s) {
  if (s == "none") return NoiseMode::none;
  if (s == "additive") return NoiseMode::additive;
  if (s == "multiplicative") return NoiseMode::multiplicative;
  fail(Errc::invalid_parameter, "unknown noise mode '" + s + "'");
}

std::string to_string(NoiseMode m) {
  switch (m) {
    case NoiseMode::none: return "none";
    case NoiseMode::additive: return "additive";
    case NoiseMode::multiplicative: return "multiplicative";
  }
  return "none";
}

ModelVec inject_noise(const ModelVec& model, NoiseMode mode, double nis, RngStream& rng) {
  if (nis < 0.0) fail(Errc::invalid_parameter, "nis must be nonnegative");
  if (mode == NoiseMode::none || nis == 0.0) return model;
  ModelVec out = model;
  for (double& c : out.coords) {
    const double z = rng.normal(0.0, nis);
    c = mode == NoiseMode::additive ? c + z : c * (1.0 + z);
  }
  return out;
}

}  // namespace wfl
