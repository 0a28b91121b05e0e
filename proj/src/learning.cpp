#include "wfl/learning.hpp"

#include <string>

#include "wfl/errors.hpp"

namespace wfl {

ModelVec local_sgd(const ModelVec& model, const ConvexTask& task, int client, int e_steps,
                   double eta, int batch, RngStream& rng) {
  if (e_steps < 0) fail(Errc::invalid_parameter, "e_steps must be >= 0");
  const std::vector<double> etas(static_cast<std::size_t>(e_steps), eta);
  return local_sgd(model, task, client, etas, batch, rng);
}

ModelVec local_sgd(const ModelVec& model, const ConvexTask& task, int client,
                   std::span<const double> etas, int batch, RngStream& rng) {
  ModelVec w = model;
  for (double eta : etas) {
    const ModelVec g = task.grad_minibatch(client, w, batch, rng);
    check_finite(g);
    axpy(-eta, g, w);
  }
  check_finite(w);
  return w;
}

namespace {

ModelVec weighted_upload_sum(const std::vector<Upload>& uploads) {
  ModelVec out(uploads.front().model.dim(), 0.0);
  for (const Upload& u : uploads) {
    if (u.weight < 0.0) fail(Errc::probability_out_of_range, "upload weight must be nonnegative");
    axpy(u.weight, u.model, out);
  }
  return out;
}

}  // namespace

ModelVec aggregate_full(const std::vector<Upload>& uploads) {
  if (uploads.empty()) fail(Errc::empty_set, "aggregate_full over zero uploads");
  return weighted_upload_sum(uploads);
}

ModelVec aggregate_partial(const std::vector<Upload>& responders, int n_total) {
  if (responders.empty()) fail(Errc::empty_set, "aggregate_partial with K = 0");
  if (n_total < static_cast<int>(responders.size())) {
    fail(Errc::inconsistent_inputs, "n_total smaller than responder count");
  }
  ModelVec out = weighted_upload_sum(responders);
  scale(out, static_cast<double>(n_total) / static_cast<double>(responders.size()));
  return out;
}

double lr_schedule(long t, double r_t, double mu, double gamma) {
  if (mu <= 0.0) fail(Errc::invalid_parameter, "mu must be positive");
  if (gamma <= 0.0) fail(Errc::invalid_parameter, "gamma must be positive");
  if (r_t < 0.0 || r_t > 1.0) fail(Errc::probability_out_of_range, "r_t outside [0, 1]");
  return 2.0 * r_t / (mu * (gamma + static_cast<double>(t)));
}

}  // namespace wfl
