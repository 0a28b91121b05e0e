#pragma once

#include <span>
#include <string>
#include <vector>

#include "wfl/model_vec.hpp"
#include "wfl/rng.hpp"
#include "wfl/task.hpp"

namespace wfl {

// e_steps mini-batch SGD updates on client k's local objective, starting from
// `model`, with the step size held fixed for the whole call. e_steps == 0
// returns the model unchanged (identity trainer).
ModelVec local_sgd(const ModelVec& model, const ConvexTask& task, int client, int e_steps,
                   double eta, int batch, RngStream& rng);

// Variant with one step size per local update (etas.size() steps).
ModelVec local_sgd(const ModelVec& model, const ConvexTask& task, int client,
                   std::span<const double> etas, int batch, RngStream& rng);

// One client's upload as seen by the aggregator.
struct Upload {
  std::string id;
  double weight = 0.0;  // p_n
  ModelVec model;
};

// sum_n p_n w_n over every client.
ModelVec aggregate_full(const std::vector<Upload>& uploads);

// (n_total / K) * sum_{n in S} p_n w_n over the K responders. Identical
// operation sequence to aggregate_full so K == n_total reproduces it
// bit-exactly.
ModelVec aggregate_partial(const std::vector<Upload>& responders, int n_total);

// Diminishing schedule eta_t = 2 r_t / (mu (gamma + t)), with r_t the round's
// participation ratio (1 for full participation).
double lr_schedule(long t, double r_t, double mu, double gamma);

}  // namespace wfl
