#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "wfl/model_vec.hpp"
#include "wfl/rng.hpp"

namespace wfl {

struct Sample {
  std::vector<double> x;
  double y = 0.0;
};

using ClientData = std::vector<Sample>;

enum class TaskKind { ridge, logistic };

TaskKind task_kind_from_string(const std::string& s);
std::string to_string(TaskKind k);

// Convex objective split across clients:
//   F(w)   = sum_n p_n F_n(w)
//   F_n(w) = (1/s_n) sum_j data_loss(w; x_j, y_j) + (lambda/2) ||w||^2
// ridge:    data_loss = (1/2)(x'w - y)^2
// logistic: data_loss = log(1 + exp(-y x'w)), labels y in {-1, +1}
// A client with no samples contributes the regularizer alone.
struct ConvexTask {
  TaskKind kind = TaskKind::ridge;
  double lambda = 0.0;
  int dim = 0;
  std::vector<ClientData> data;   // one entry per client
  std::vector<double> weights;    // p_n, nonnegative, sum to 1

  int n_clients() const { return static_cast<int>(data.size()); }
  void validate() const;

  double value(const ModelVec& w) const;
  double value_client(int k, const ModelVec& w) const;
  ModelVec grad(const ModelVec& w) const;
  ModelVec grad_client(int k, const ModelVec& w) const;
  // Mini-batch stochastic gradient, sampled uniformly with replacement.
  ModelVec grad_minibatch(int k, const ModelVec& w, int batch, RngStream& rng) const;
};

// Weights proportional to per-client sample counts (equal when all empty).
std::vector<double> weights_from_sizes(const std::vector<ClientData>& data);

// Disjoint cover of `samples` with sizes proportional to `ratios`
// (largest-remainder rounding, ties to the lower index), preceded by a
// Fisher-Yates shuffle from `rng`.
std::vector<ClientData> partition_dataset(const ClientData& samples,
                                          const std::vector<double>& ratios, RngStream& rng);

// Synthetic regression/classification data: x ~ N(0, I), y = x'w_true + noise
// for ridge, y = sign(x'w_true + noise) for logistic.
struct SyntheticSpec {
  TaskKind kind = TaskKind::ridge;
  int dim = 2;
  int n_samples = 16;
  double label_noise = 0.0;
  std::vector<double> w_true;  // defaults to all ones when empty
};
ClientData generate_dataset(const SyntheticSpec& spec, RngStream& rng);

// Flat columnar text round-trip (client<TAB>y<TAB>x0<TAB>x1...).
std::string dataset_to_tsv(const std::vector<ClientData>& per_client);
std::vector<ClientData> dataset_from_tsv(const std::string& text);

enum class NoiseMode { none, additive, multiplicative };

NoiseMode noise_mode_from_string(const std::string& s);
std::string to_string(NoiseMode m);

struct NoiseSpec {
  NoiseMode mode = NoiseMode::none;
  double nis = 0.0;  // deviation of the injected Gaussian
  std::set<std::string> malicious_ids;

  bool active() const { return mode != NoiseMode::none && nis > 0.0; }
};

// Additive: w + N(0, nis) per coordinate; multiplicative: w * (1 + N(0, nis)).
// Identity (bit-exact, no draws consumed) when mode is none or nis == 0.
ModelVec inject_noise(const ModelVec& model, NoiseMode mode, double nis, RngStream& rng);

}  // namespace wfl
