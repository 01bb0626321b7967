#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "netopt/mixing.hpp"
#include "netopt/problem.hpp"

namespace netopt {

/// Applies (D (x) I_m) to a stacked vector: block i of the result is
/// sum_j D_ij x_j.
Eigen::VectorXd apply_mixing(const Eigen::MatrixXd& D, const Eigen::VectorXd& x, int m);

/// Arithmetic mean of the agent blocks.
Eigen::VectorXd block_mean(const Eigen::VectorXd& x, int n, int m);

/// ||x - 1 (x) xbar||, the stacked consensus error.
double consensus_error(const Eigen::VectorXd& x, int n, int m);

struct DgdState {
  Eigen::VectorXd x;  // stacked n*m
  long iter = 0;
};

struct DgdDiagnostics {
  long iter = 0;
  double L_alpha = 0.0;
  double grad_L_norm = 0.0;
  double cons_err = 0.0;          // ||x - 1 (x) xbar||
  double grad_F_mean_norm = 0.0;  // ||grad F(xbar)||
  double grad_F_c_norm = 0.0;     // running sup feeds the H certificate
  Eigen::VectorXd x_bar;
};

/// One DGD step x+ = W_D x - alpha grad F_c(x). D must be doubly-stochastic.
DgdState dgd_step(const DgdState& state, const MixingMatrix& D, const ProblemInstance& problem,
                  double alpha);

/// L_alpha(x) = F_c(x) + 1/(2 alpha) x^T (I - W_D) x.
double lyapunov_L_alpha(const Eigen::VectorXd& x, const MixingMatrix& D, double alpha,
                        const ProblemInstance& problem);

/// grad L_alpha(x) = grad F_c(x) + (1/alpha)(I - W_D) x.
Eigen::VectorXd grad_L_alpha(const Eigen::VectorXd& x, const MixingMatrix& D, double alpha,
                             const ProblemInstance& problem);

/// Largest descent-guaranteeing step: sigma_min(I + D) / L_c.
double alpha_max(const MixingMatrix& D, double L_c);

/// Per-agent almost-consensus bound sigma2^nu ||x_i^0|| + alpha H / (1 - sigma2).
double consensus_bound(long nu, double sigma2, double H, double alpha, double x0_norm);

/// K' = n sqrt(n) L_c H / (1 - sigma2); limit points are K' alpha - critical.
double eps_crit_constant(int n, double L_c, double H, double sigma2);

/// Ball-invariance step threshold min_i min{eps D_ii / h, 2 D_ii delta (R-eps)/h^2}
/// with h estimated by sampling |grad f_i| over the radius-R ball.
/// delta <= 0 (no certificate) yields 0.
double alpha_b(const ProblemInstance& problem, const MixingMatrix& D, double R, double eps,
               double delta, int h_samples = 512, std::uint64_t seed = 2024);

struct DgdRunOptions {
  long max_iters = 10000;
  double grad_inf_tol = 1e-10;  // stop when ||grad L_alpha||_inf drops below
  long record_stride = 1;
  long plateau_window = 100;
  double plateau_rel_tol = 1e-12;
};

struct DgdTrace {
  std::vector<DgdDiagnostics> records;
  DgdState final_state;
  bool diverged = false;
  long diverged_at = -1;
  bool plateaued = false;
  double H = 0.0;  // sup over the trace of ||grad F_c||
};

/// Runs DGD, recording diagnostics every record_stride iterations (plus the
/// final iterate). Divergence leaves the last finite state in final_state.
DgdTrace run_dgd(const ProblemInstance& problem, const MixingMatrix& D, double alpha,
                 const Eigen::VectorXd& x0, const DgdRunOptions& opts = {},
                 const std::function<void(const DgdState&, const DgdDiagnostics&)>& observer = {});

}  // namespace netopt
