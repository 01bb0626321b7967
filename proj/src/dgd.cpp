#include "netopt/dgd.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "netopt/rng.hpp"

namespace netopt {

Eigen::VectorXd apply_mixing(const Eigen::MatrixXd& D, const Eigen::VectorXd& x, int m) {
  const int n = static_cast<int>(D.rows());
  Eigen::Map<const Eigen::MatrixXd> X(x.data(), m, n);  // column i = block i
  Eigen::MatrixXd Y = X * D.transpose();
  return Eigen::Map<Eigen::VectorXd>(Y.data(), Y.size());
}

Eigen::VectorXd block_mean(const Eigen::VectorXd& x, int n, int m) {
  Eigen::Map<const Eigen::MatrixXd> X(x.data(), m, n);
  return X.rowwise().mean();
}

double consensus_error(const Eigen::VectorXd& x, int n, int m) {
  const Eigen::VectorXd xbar = block_mean(x, n, m);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += (x.segment(static_cast<Eigen::Index>(i) * m, m) - xbar).squaredNorm();
  return std::sqrt(acc);
}

DgdState dgd_step(const DgdState& state, const MixingMatrix& D, const ProblemInstance& problem,
                  double alpha) {
  if (D.kind != StochasticKind::Doubly)
    throw std::invalid_argument("dgd_step requires a doubly-stochastic weight matrix");
  if (alpha <= 0.0) throw std::invalid_argument("dgd_step requires alpha > 0");
  const Eigen::VectorXd g = problem.grad_F_c(state.x);
  if (!g.allFinite())
    throw std::runtime_error("dgd_step: non-finite gradient at iteration " + std::to_string(state.iter));
  DgdState out;
  out.x = apply_mixing(D.W, state.x, problem.m) - alpha * g;
  out.iter = state.iter + 1;
  return out;
}

double lyapunov_L_alpha(const Eigen::VectorXd& x, const MixingMatrix& D, double alpha,
                        const ProblemInstance& problem) {
  const Eigen::VectorXd Wx = apply_mixing(D.W, x, problem.m);
  return problem.F_c(x) + (x.squaredNorm() - x.dot(Wx)) / (2.0 * alpha);
}

Eigen::VectorXd grad_L_alpha(const Eigen::VectorXd& x, const MixingMatrix& D, double alpha,
                             const ProblemInstance& problem) {
  return problem.grad_F_c(x) + (x - apply_mixing(D.W, x, problem.m)) / alpha;
}

double alpha_max(const MixingMatrix& D, double L_c) {
  if (L_c <= 0.0) throw std::invalid_argument("alpha_max requires L_c > 0");
  const Eigen::MatrixXd IplusD = Eigen::MatrixXd::Identity(D.n(), D.n()) + D.W;
  return sigma_min_of(IplusD) / L_c;
}

double consensus_bound(long nu, double sigma2, double H, double alpha, double x0_norm) {
  return std::pow(sigma2, static_cast<double>(nu)) * x0_norm + alpha * H / (1.0 - sigma2);
}

double eps_crit_constant(int n, double L_c, double H, double sigma2) {
  return n * std::sqrt(static_cast<double>(n)) * L_c * H / (1.0 - sigma2);
}

double alpha_b(const ProblemInstance& problem, const MixingMatrix& D, double R, double eps,
               double delta, int h_samples, std::uint64_t seed) {
  if (!(eps > 0.0 && eps < R)) throw std::invalid_argument("alpha_b requires 0 < eps < R");
  if (delta <= 0.0) return 0.0;  // uncertified annulus
  Rng rng(seed);
  double h = 0.0;
  for (int k = 0; k < h_samples; ++k) {
    const double r = R * std::pow(rng.uniform(), 1.0 / problem.m);
    const Eigen::VectorXd theta = r * rng.sphere(problem.m);
    for (const auto& o : problem.oracles) h = std::max(h, o->grad(theta).norm());
    // the sup typically lives on the boundary sphere
    const Eigen::VectorXd shell = R * rng.sphere(problem.m);
    for (const auto& o : problem.oracles) h = std::max(h, o->grad(shell).norm());
  }
  if (h <= 0.0) return std::numeric_limits<double>::infinity();
  double bound = std::numeric_limits<double>::infinity();
  for (int i = 0; i < problem.n; ++i) {
    const double Dii = D.W(i, i);
    bound = std::min(bound, std::min(eps * Dii / h, 2.0 * Dii * delta * (R - eps) / (h * h)));
  }
  return bound;
}

DgdTrace run_dgd(const ProblemInstance& problem, const MixingMatrix& D, double alpha,
                 const Eigen::VectorXd& x0, const DgdRunOptions& opts,
                 const std::function<void(const DgdState&, const DgdDiagnostics&)>& observer) {
  if (x0.size() != static_cast<Eigen::Index>(problem.n) * problem.m)
    throw std::invalid_argument("run_dgd: x0 has the wrong stacked dimension");
  if (D.kind != StochasticKind::Doubly)
    throw std::invalid_argument("run_dgd requires a doubly-stochastic weight matrix");

  DgdTrace trace;
  DgdState state{x0, 0};
  std::vector<double> grad_hist;
  grad_hist.reserve(opts.max_iters + 1);

  for (long nu = 0; nu <= opts.max_iters; ++nu) {
    const Eigen::VectorXd g = problem.grad_F_c(state.x);
    if (!state.x.allFinite() || !g.allFinite()) {
      trace.diverged = true;
      trace.diverged_at = nu;
      break;
    }
    const Eigen::VectorXd Wx = apply_mixing(D.W, state.x, problem.m);
    const Eigen::VectorXd gL = g + (state.x - Wx) / alpha;

    trace.H = std::max(trace.H, g.norm());
    grad_hist.push_back(gL.norm());
    if (!trace.plateaued && static_cast<long>(grad_hist.size()) > opts.plateau_window) {
      const double prev = grad_hist[grad_hist.size() - 1 - opts.plateau_window];
      if (std::abs(grad_hist.back() - prev) < opts.plateau_rel_tol * std::max(1.0, prev))
        trace.plateaued = true;
    }

    const bool stop = gL.lpNorm<Eigen::Infinity>() < opts.grad_inf_tol || nu == opts.max_iters;
    if (nu % opts.record_stride == 0 || stop) {
      DgdDiagnostics d;
      d.iter = state.iter;
      d.L_alpha = problem.F_c(state.x) + (state.x.squaredNorm() - state.x.dot(Wx)) / (2.0 * alpha);
      d.grad_L_norm = gL.norm();
      d.cons_err = consensus_error(state.x, problem.n, problem.m);
      d.x_bar = block_mean(state.x, problem.n, problem.m);
      d.grad_F_mean_norm = problem.grad_F(d.x_bar).norm();
      d.grad_F_c_norm = g.norm();
      trace.records.push_back(d);
      if (observer) observer(state, d);
    }
    if (stop) break;

    DgdState next;
    next.x = Wx - alpha * g;
    next.iter = state.iter + 1;
    if (!next.x.allFinite()) {
      trace.diverged = true;
      trace.diverged_at = nu + 1;
      break;
    }
    state = std::move(next);
  }
  trace.final_state = state;
  return trace;
}

}  // namespace netopt
