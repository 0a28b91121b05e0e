#pragma once

#include <span>
#include <string>
#include <vector>

#include "wfl/model_vec.hpp"
#include "wfl/rng.hpp"
#include "wfl/task.hpp"

namespace wfl {

// Exact minimizers and minimum values of the global and per-client
// objectives. Ridge tasks solve in closed form; logistic tasks run damped
// Newton to gradient norms below 1e-12.
struct TaskOptima {
  ModelVec w_star;
  double f_star = 0.0;
  std::vector<ModelVec> w_k_star;
  std::vector<double> f_k_star;
};
TaskOptima solve_optima(const ConvexTask& task);

// Where to measure the gradient-statistics constants: points sampled
// uniformly from a ball around `center` (plus the center itself); the margin
// widens the ball beyond the region a calibration run visits.
struct ProbeSpec {
  ModelVec center;
  double radius = 1.0;
  double margin = 1.2;
  int n_points = 64;
  int batch = 1;   // mini-batch size the constants should describe
  int e_local = 1;
};

struct ConvergenceParams {
  double l_smooth = 0.0;           // L
  double mu = 0.0;                 // strong convexity
  std::vector<double> sigma_k;     // per-client stochastic-gradient deviation
  double g_bound = 0.0;            // G
  int e_local = 1;
  std::vector<double> p;           // client weights
  int n_clients = 0;
  double gamma_het = 0.0;          // heterogeneity Gamma
  double kappa = 0.0;              // L / mu
  double gamma = 0.0;              // max{8 kappa, E}

  void validate() const;
};

// L and mu from per-client Hessian eigen-extremes (exact for ridge, bounds
// for logistic); sigma_k and G from exact gradient statistics maximized over
// the probe region; Gamma from the task optima.
ConvergenceParams estimate_constants(const ConvexTask& task, const ProbeSpec& probe,
                                     RngStream& rng);

// Gamma = max(0, F* - sum_k p_k F_k*); negative beyond tolerance is an error.
double gamma_het(double f_star, std::span<const double> f_k_stars, std::span<const double> p);

double compute_B(const ConvergenceParams& params);
double compute_C(const ConvergenceParams& params, int n_tilde);
double compute_D(const ConvergenceParams& params);

// (2 kappa / (gamma + T)) * ((B + D)/mu + 2 L delta0)
double theorem_bound(const ConvergenceParams& params, long t, double delta0);

// Tilde-Delta recursion: x <- x - mu^2 x^2 / (4 (B + C_t)), clamped at zero.
std::vector<double> supremum_recursion(double delta0, double mu, double B,
                                       std::span<const double> c_seq, int horizon);

// r_t-scaled step size relative to the full-participation schedule.
double lemma2_rate(double base_eta, double r_t);

// Replica-averaged distance-to-optimum series with companion data for the
// bound checks.
struct BoundTrace {
  int replicas = 0;
  std::vector<double> delta;     // mean ||w_t - w*||^2 over replicas
  std::vector<double> delta_se;  // standard error of that mean
  std::vector<double> delta_sup; // supremum recursion seeded at delta[0]
  std::vector<double> bound;     // theorem RHS per round
  std::vector<double> gap;       // mean F(w_t) - F*
  std::vector<double> gap_se;
  std::vector<double> r_t;
  std::vector<double> eta_t;

  std::string to_json() const;
  static BoundTrace from_json(const std::string& text);
};

// Per-round verdicts for the one-step inequality
//   delta_{t+1} <= (1 - eta_t mu) delta_t + eta_t^2 (B + C_t)
// within three standard errors of the replica mean.
struct Lemma1Result {
  std::vector<bool> holds;
  int violations = 0;
};
Lemma1Result lemma1_check(const BoundTrace& trace, const ConvergenceParams& params,
                          std::span<const double> c_seq);

}  // namespace wfl
