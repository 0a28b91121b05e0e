#include "wfl/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "wfl/errors.hpp"

namespace wfl {

using nlohmann::json;

namespace {

Eigen::MatrixXd data_matrix(const ClientData& cd, int dim) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(cd.size()), dim);
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    for (int i = 0; i < dim; ++i) x(j, i) = cd[static_cast<std::size_t>(j)].x[static_cast<std::size_t>(i)];
  }
  return x;
}

// (1/s) X'X + lambda I; the Hessian of a ridge client (lambda I alone when
// the client holds no samples).
Eigen::MatrixXd ridge_hessian(const ConvexTask& task, int k) {
  const ClientData& cd = task.data[static_cast<std::size_t>(k)];
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(task.dim, task.dim) * task.lambda;
  if (!cd.empty()) {
    const Eigen::MatrixXd x = data_matrix(cd, task.dim);
    h += x.transpose() * x / static_cast<double>(cd.size());
  }
  return h;
}

Eigen::VectorXd ridge_linear_term(const ConvexTask& task, int k) {
  const ClientData& cd = task.data[static_cast<std::size_t>(k)];
  Eigen::VectorXd b = Eigen::VectorXd::Zero(task.dim);
  for (const Sample& s : cd) {
    for (int i = 0; i < task.dim; ++i) b(i) += s.x[static_cast<std::size_t>(i)] * s.y;
  }
  if (!cd.empty()) b /= static_cast<double>(cd.size());
  return b;
}

ModelVec to_model(const Eigen::VectorXd& v) {
  return ModelVec(std::vector<double>(v.data(), v.data() + v.size()));
}

Eigen::VectorXd to_eigen(const ModelVec& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.coords.data(),
                                           static_cast<Eigen::Index>(v.dim()));
}

ModelVec newton_minimize(const ConvexTask& task, int client /* -1 for global */) {
  // Damped Newton on a lambda-strongly-convex logistic objective.
  ModelVec w(static_cast<std::size_t>(task.dim), 0.0);
  for (int iter = 0; iter < 200; ++iter) {
    const ModelVec g = client < 0 ? task.grad(w) : task.grad_client(client, w);
    if (std::sqrt(l2_norm_sq(g)) < 1e-13) break;
    // Hessian of the logistic loss at w
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(task.dim, task.dim) * task.lambda;
    const int k_lo = client < 0 ? 0 : client;
    const int k_hi = client < 0 ? task.n_clients() : client + 1;
    for (int k = k_lo; k < k_hi; ++k) {
      const ClientData& cd = task.data[static_cast<std::size_t>(k)];
      if (cd.empty()) continue;
      const double wk = client < 0 ? task.weights[static_cast<std::size_t>(k)] : 1.0;
      Eigen::MatrixXd hk = Eigen::MatrixXd::Zero(task.dim, task.dim);
      for (const Sample& s : cd) {
        double margin = 0.0;
        for (int i = 0; i < task.dim; ++i) margin += s.x[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
        const double p = 1.0 / (1.0 + std::exp(-margin));
        const double c = p * (1.0 - p);
        const Eigen::Map<const Eigen::VectorXd> xv(s.x.data(), task.dim);
        hk += c * xv * xv.transpose();
      }
      h += wk * hk / static_cast<double>(cd.size());
    }
    const Eigen::VectorXd step = h.ldlt().solve(to_eigen(g));
    for (int i = 0; i < task.dim; ++i) w.coords[static_cast<std::size_t>(i)] -= step(i);
  }
  return w;
}

}  // namespace

TaskOptima solve_optima(const ConvexTask& task) {
  task.validate();
  TaskOptima opt;
  if (task.kind == TaskKind::ridge) {
    auto solve = [&task](const Eigen::MatrixXd& h, const Eigen::VectorXd& b,
                         const std::string& what) {
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(h);
      if (eig.eigenvalues().minCoeff() <= 1e-12 * std::max(1.0, eig.eigenvalues().maxCoeff())) {
        fail(Errc::unsupported_task, what + " objective is singular; use lambda > 0");
      }
      return to_model(h.ldlt().solve(b));
    };
    Eigen::MatrixXd h_global = Eigen::MatrixXd::Zero(task.dim, task.dim);
    Eigen::VectorXd b_global = Eigen::VectorXd::Zero(task.dim);
    for (int k = 0; k < task.n_clients(); ++k) {
      const Eigen::MatrixXd h = ridge_hessian(task, k);
      const Eigen::VectorXd b = ridge_linear_term(task, k);
      opt.w_k_star.push_back(solve(h, b, "client " + std::to_string(k)));
      h_global += task.weights[static_cast<std::size_t>(k)] * h;
      b_global += task.weights[static_cast<std::size_t>(k)] * b;
    }
    opt.w_star = solve(h_global, b_global, "global");
  } else {
    if (task.lambda <= 0.0) fail(Errc::unsupported_task, "logistic optima need lambda > 0");
    for (int k = 0; k < task.n_clients(); ++k) opt.w_k_star.push_back(newton_minimize(task, k));
    opt.w_star = newton_minimize(task, -1);
  }
  opt.f_star = task.value(opt.w_star);
  for (int k = 0; k < task.n_clients(); ++k) {
    opt.f_k_star.push_back(task.value_client(k, opt.w_k_star[static_cast<std::size_t>(k)]));
  }
  return opt;
}

void ConvergenceParams::validate() const {
  if (mu <= 0.0 || l_smooth <= 0.0) fail(Errc::invalid_parameter, "L and mu must be positive");
  if (mu > l_smooth + 1e-12) {
    fail(Errc::inconsistent_inputs, "mu exceeds L");
  }
  if (std::abs(kappa - l_smooth / mu) > 1e-12 * std::max(1.0, kappa)) {
    fail(Errc::inconsistent_inputs, "kappa != L/mu");
  }
  const double want = std::max(8.0 * kappa, static_cast<double>(e_local));
  if (std::abs(gamma - want) > 1e-12 * std::max(1.0, want)) {
    fail(Errc::inconsistent_inputs, "gamma != max{8 kappa, E}");
  }
}

ConvergenceParams estimate_constants(const ConvexTask& task, const ProbeSpec& probe,
                                     RngStream& rng) {
  task.validate();
  if (probe.n_points < 1) fail(Errc::invalid_parameter, "probe needs at least one point");
  if (static_cast<int>(probe.center.dim()) != task.dim) {
    fail(Errc::dimension_mismatch, "probe center dim != task dim");
  }

  ConvergenceParams cp;
  cp.e_local = probe.e_local;
  cp.p = task.weights;
  cp.n_clients = task.n_clients();

  // Smoothness and strong convexity from per-client curvature.
  double l_max = 0.0;
  double mu_min = std::numeric_limits<double>::infinity();
  for (int k = 0; k < task.n_clients(); ++k) {
    if (task.kind == TaskKind::ridge) {
      const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(ridge_hessian(task, k));
      l_max = std::max(l_max, eig.eigenvalues().maxCoeff());
      mu_min = std::min(mu_min, eig.eigenvalues().minCoeff());
    } else {
      const ClientData& cd = task.data[static_cast<std::size_t>(k)];
      double top = task.lambda;
      if (!cd.empty()) {
        const Eigen::MatrixXd x = data_matrix(cd, task.dim);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x.transpose() * x);
        top = eig.eigenvalues().maxCoeff() / (4.0 * static_cast<double>(cd.size())) + task.lambda;
      }
      l_max = std::max(l_max, top);
      mu_min = std::min(mu_min, task.lambda);
    }
  }
  cp.l_smooth = l_max;
  cp.mu = mu_min;
  cp.kappa = cp.l_smooth / cp.mu;
  cp.gamma = std::max(8.0 * cp.kappa, static_cast<double>(cp.e_local));

  // Probe points: the calibration region blown up by the margin.
  std::vector<ModelVec> points{probe.center};
  const double radius = probe.radius * probe.margin;
  for (int i = 1; i < probe.n_points; ++i) {
    ModelVec p = probe.center;
    double norm_sq = 0.0;
    std::vector<double> dir(static_cast<std::size_t>(task.dim));
    for (double& d : dir) {
      d = rng.normal();
      norm_sq += d * d;
    }
    const double u = std::pow(rng.uniform_pos(), 1.0 / task.dim);  // uniform in the ball
    const double scl = norm_sq > 0 ? radius * u / std::sqrt(norm_sq) : 0.0;
    for (int d = 0; d < task.dim; ++d) p.coords[static_cast<std::size_t>(d)] += scl * dir[static_cast<std::size_t>(d)];
    points.push_back(std::move(p));
  }

  // Exact single-draw gradient statistics at each probe point. For sampling
  // with replacement the batch variance is the single-sample variance over
  // the batch size.
  cp.sigma_k.assign(static_cast<std::size_t>(task.n_clients()), 0.0);
  double g_sq = 0.0;
  for (int k = 0; k < task.n_clients(); ++k) {
    const ClientData& cd = task.data[static_cast<std::size_t>(k)];
    double var_max = 0.0;
    for (const ModelVec& w : points) {
      const ModelVec mean_grad = task.grad_client(k, w);
      double var_single = 0.0;
      for (std::size_t j = 0; j < cd.size(); ++j) {
        // Single-sample stochastic gradient (data term of sample j + reg)
        ModelVec g(static_cast<std::size_t>(task.dim), 0.0);
        const Sample& s = cd[j];
        double margin = 0.0;
        for (int i = 0; i < task.dim; ++i) margin += s.x[static_cast<std::size_t>(i)] * w[static_cast<std::size_t>(i)];
        double coeff;
        if (task.kind == TaskKind::ridge) {
          coeff = margin - s.y;
        } else {
          const double m = -s.y * margin;
          coeff = -s.y * (1.0 / (1.0 + std::exp(-m)));
        }
        for (int i = 0; i < task.dim; ++i) {
          g.coords[static_cast<std::size_t>(i)] = coeff * s.x[static_cast<std::size_t>(i)] + task.lambda * w[static_cast<std::size_t>(i)];
        }
        var_single += l2_dist_sq(g, mean_grad);
      }
      if (!cd.empty()) var_single /= static_cast<double>(cd.size());
      const double var_batch = var_single / static_cast<double>(std::max(probe.batch, 1));
      var_max = std::max(var_max, var_batch);
      g_sq = std::max(g_sq, l2_norm_sq(mean_grad) + var_batch);
    }
    cp.sigma_k[static_cast<std::size_t>(k)] = std::sqrt(var_max);
  }
  cp.g_bound = std::sqrt(g_sq);

  const TaskOptima opt = solve_optima(task);
  cp.gamma_het = gamma_het(opt.f_star, opt.f_k_star, task.weights);
  cp.validate();
  return cp;
}

double gamma_het(double f_star, std::span<const double> f_k_stars, std::span<const double> p) {
  if (f_k_stars.size() != p.size()) {
    fail(Errc::dimension_mismatch, "f_k_stars and p differ in length");
  }
  double weighted = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) weighted += p[k] * f_k_stars[k];
  if (f_star < weighted - 1e-12) {
    fail(Errc::inconsistent_inputs, "F* below the weighted client minima");
  }
  return std::max(0.0, f_star - weighted);
}

double compute_B(const ConvergenceParams& params) {
  double b = 0.0;
  for (std::size_t k = 0; k < params.p.size(); ++k) {
    b += params.p[k] * params.p[k] * params.sigma_k[k] * params.sigma_k[k];
  }
  b += 6.0 * params.l_smooth * params.gamma_het;
  const double e1 = static_cast<double>(params.e_local - 1);
  b += 8.0 * e1 * e1 * params.g_bound * params.g_bound;
  return b;
}

double compute_C(const ConvergenceParams& params, int n_tilde) {
  if (params.n_clients == 1) return 0.0;  // single client is full participation
  if (n_tilde < 1 || n_tilde > params.n_clients) {
    fail(Errc::invalid_parameter, "n_tilde " + std::to_string(n_tilde) + " outside [1, N]");
  }
  const double n = static_cast<double>(params.n_clients);
  const double nt = static_cast<double>(n_tilde);
  const double e = static_cast<double>(params.e_local);
  return (n - nt) / (n - 1.0) * (4.0 / nt) * e * e * params.g_bound * params.g_bound;
}

double compute_D(const ConvergenceParams& params) {
  const double e = static_cast<double>(params.e_local);
  return 4.0 * e * e * params.g_bound * params.g_bound;
}

double theorem_bound(const ConvergenceParams& params, long t, double delta0) {
  if (delta0 < 0.0) fail(Errc::invalid_parameter, "delta0 must be nonnegative");
  const double b = compute_B(params);
  const double d = compute_D(params);
  return 2.0 * params.kappa / (params.gamma + static_cast<double>(t)) *
         ((b + d) / params.mu + 2.0 * params.l_smooth * delta0);
}

std::vector<double> supremum_recursion(double delta0, double mu, double B,
                                       std::span<const double> c_seq, int horizon) {
  if (horizon < 0) fail(Errc::invalid_parameter, "horizon must be nonnegative");
  if (static_cast<int>(c_seq.size()) < horizon) {
    fail(Errc::invalid_parameter, "c_seq shorter than horizon");
  }
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(horizon) + 1);
  out.push_back(delta0);
  double x = delta0;
  for (int t = 0; t < horizon; ++t) {
    const double denom = 4.0 * (B + c_seq[static_cast<std::size_t>(t)]);
    x = denom > 0.0 ? x - mu * mu * x * x / denom : x;
    x = std::max(0.0, x);
    out.push_back(x);
  }
  return out;
}

double lemma2_rate(double base_eta, double r_t) {
  if (!(r_t > 0.0 && r_t <= 1.0)) fail(Errc::probability_out_of_range, "r_t outside (0, 1]");
  return r_t * base_eta;
}

std::string BoundTrace::to_json() const {
  json j;
  j["replicas"] = replicas;
  j["delta"] = delta;
  j["delta_se"] = delta_se;
  j["delta_sup"] = delta_sup;
  j["bound"] = bound;
  j["gap"] = gap;
  j["gap_se"] = gap_se;
  j["r_t"] = r_t;
  j["eta_t"] = eta_t;
  return j.dump(2) + "\n";
}

BoundTrace BoundTrace::from_json(const std::string& text) {
  BoundTrace t;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::io_error, std::string("bad trace: ") + e.what());
  }
  t.replicas = j.at("replicas").get<int>();
  t.delta = j.at("delta").get<std::vector<double>>();
  t.delta_se = j.at("delta_se").get<std::vector<double>>();
  t.delta_sup = j.at("delta_sup").get<std::vector<double>>();
  t.bound = j.at("bound").get<std::vector<double>>();
  t.gap = j.at("gap").get<std::vector<double>>();
  t.gap_se = j.at("gap_se").get<std::vector<double>>();
  t.r_t = j.at("r_t").get<std::vector<double>>();
  t.eta_t = j.at("eta_t").get<std::vector<double>>();
  return t;
}

Lemma1Result lemma1_check(const BoundTrace& trace, const ConvergenceParams& params,
                          std::span<const double> c_seq) {
  if (trace.replicas < 2) {
    fail(Errc::insufficient_replicas,
         "lemma1_check needs >= 2 replicas, got " + std::to_string(trace.replicas));
  }
  // delta holds T+1 points; eta_t and c_seq describe the T transitions.
  if (trace.delta.size() != trace.delta_se.size() || trace.delta.empty()) {
    fail(Errc::dimension_mismatch, "trace series lengths differ");
  }
  if (trace.eta_t.size() + 1 < trace.delta.size() || c_seq.size() + 1 < trace.delta.size()) {
    fail(Errc::dimension_mismatch, "eta/c series shorter than the trace");
  }
  Lemma1Result res;
  const double b = compute_B(params);
  for (std::size_t t = 0; t + 1 < trace.delta.size(); ++t) {
    const double contraction = 1.0 - trace.eta_t[t] * params.mu;
    const double rhs = contraction * trace.delta[t] +
                       trace.eta_t[t] * trace.eta_t[t] * (b + c_seq[t]);
    const double slack =
        3.0 * (trace.delta_se[t + 1] + std::abs(contraction) * trace.delta_se[t]);
    const bool ok = trace.delta[t + 1] <= rhs + slack;
    res.holds.push_back(ok);
    if (!ok) ++res.violations;
  }
  return res;
}

}  // namespace wfl
