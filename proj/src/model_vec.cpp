#include "wfl/model_vec.hpp"

#include <cmath>
#include <string>

#include "wfl/errors.hpp"

namespace wfl {

void check_same_dim(const ModelVec& a, const ModelVec& b) {
  if (a.dim() != b.dim()) {
    fail(Errc::dimension_mismatch,
         "vector dims " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
  }
}

void check_finite(const ModelVec& v) {
  for (double x : v.coords) {
    if (!std::isfinite(x)) fail(Errc::non_finite, "model vector contains " + std::to_string(x));
  }
}

void axpy(double alpha, const ModelVec& x, ModelVec& y) {
  check_same_dim(x, y);
  for (std::size_t i = 0; i < y.dim(); ++i) y.coords[i] += alpha * x.coords[i];
}

void scale(ModelVec& v, double alpha) {
  for (double& x : v.coords) x *= alpha;
}

double dot(const ModelVec& a, const ModelVec& b) {
  check_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a.coords[i] * b.coords[i];
  return s;
}

double l2_norm_sq(const ModelVec& v) { return dot(v, v); }

double l2_dist_sq(const ModelVec& a, const ModelVec& b) {
  check_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a.coords[i] - b.coords[i];
    s += d * d;
  }
  return s;
}

ModelVec weighted_sum(const std::vector<const ModelVec*>& models,
                      const std::vector<double>& weights) {
  if (models.empty() || models.size() != weights.size()) {
    fail(Errc::dimension_mismatch, "weighted_sum needs matching non-empty models and weights");
  }
  ModelVec out(models[0]->dim(), 0.0);
  for (std::size_t i = 0; i < models.size(); ++i) {
    axpy(weights[i], *models[i], out);
  }
  return out;
}

}  // namespace wfl
