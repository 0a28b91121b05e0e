#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace wfl {

// Dense parameter vector. Plain value type; helpers below throw on dimension
// mismatch or non-finite entries so corrupted models never reach a commit.
struct ModelVec {
  std::vector<double> coords;

  ModelVec() = default;
  explicit ModelVec(std::size_t dim, double fill = 0.0) : coords(dim, fill) {}
  explicit ModelVec(std::vector<double> c) : coords(std::move(c)) {}
  ModelVec(std::initializer_list<double> init) : coords(init) {}

  std::size_t dim() const { return coords.size(); }
  double& operator[](std::size_t i) { return coords[i]; }
  double operator[](std::size_t i) const { return coords[i]; }

  bool operator==(const ModelVec&) const = default;
};

void check_same_dim(const ModelVec& a, const ModelVec& b);
void check_finite(const ModelVec& v);  // throws Error(non_finite)

// y += alpha * x
void axpy(double alpha, const ModelVec& x, ModelVec& y);
void scale(ModelVec& v, double alpha);
double dot(const ModelVec& a, const ModelVec& b);
double l2_norm_sq(const ModelVec& v);
double l2_dist_sq(const ModelVec& a, const ModelVec& b);

// sum_i weights[i] * models[i]; dimensions must agree, at least one entry.
ModelVec weighted_sum(const std::vector<const ModelVec*>& models,
                      const std::vector<double>& weights);

}  // namespace wfl
