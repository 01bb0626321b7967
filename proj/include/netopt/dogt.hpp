#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "netopt/mixing.hpp"
#include "netopt/problem.hpp"

namespace netopt {

struct DogtState {
  Eigen::VectorXd x;  // stacked n*m
  Eigen::VectorXd y;  // stacked n*m
  long iter = 0;
};

enum class YInitMode { Canonical, RandomizedConsensus };

/// y^0 = grad F_c(x^0) (canonical), or grad F_c(x^0) + (W_C - I) y^{-1} with a
/// Gaussian y^{-1} (randomized-consensus). Either way y^0 - grad F_c(x^0)
/// lands in span(W_C - I), which is what preserves the total sum.
Eigen::VectorXd init_y(const Eigen::VectorXd& x0, const MixingMatrix& C,
                       const ProblemInstance& problem, YInitMode mode, std::uint64_t seed = 0);

/// x+ = W_R x - alpha y;  y+ = W_C y + grad F_c(x+) - grad F_c(x).
DogtState dogt_step(const DogtState& state, const MixingMatrix& R, const MixingMatrix& C,
                    double alpha, const ProblemInstance& problem);

struct WeightedMeans {
  Eigen::VectorXd x_bar;  // r-weighted block mean, in R^m
  Eigen::VectorXd y_bar;  // plain block sum of y
  Eigen::VectorXd g_bar;  // block sum of local gradients
  double tracking_residual = 0.0;  // ||y_bar - g_bar||
};

WeightedMeans weighted_means(const DogtState& state, const Eigen::VectorXd& r,
                             const ProblemInstance& problem);

/// All constants of the Lyapunov descent chain at a given step-size.
struct LyapunovParams {
  double eps_x = 0.0, eps_y = 0.0, eps = 0.0;
  double varkappa = 0.0;
  double K2 = 0.0, K3 = 0.0, K4 = 0.0, K5 = 0.0, K6 = 0.0;
  double rho_tilde_R = 0.0, rho_tilde_C = 0.0;
  double Gamma = 0.0;
  double M = 0.0;        // gradient bound ||grad L|| <= M d
  double K_len = 0.0;    // iterate-length constant
  double alpha = 0.0;    // step the tilde/Gamma constants were evaluated at
  double alpha_tilde_1 = 0.0, alpha_tilde_2 = 0.0, alpha_tilde_3 = 0.0;
  double alpha_final_bound = 0.0;  // the single more-restrictive bound
  bool feasible = false;
  std::string infeasibility;  // names the violated step-size inequality
};

/// Simplified parameter selection (eps_x, eps_y, kappa from the closed-form
/// recipe, eps with xi = zeta); evaluates rho-tilde/Gamma/M/K at alpha.
/// Degenerate rho < 1e-8 caps eps at 1e3. Throws if infeasible at alpha and
/// throw_on_infeasible is set; otherwise returns with feasible = false.
LyapunovParams default_params(const SpectralConstants& spec, double L_c, double L, int n,
                              double alpha, bool throw_on_infeasible = true);

/// The three practical step-size bounds and the single final one.
struct AlphaBounds {
  double tilde1 = 0.0, tilde2 = 0.0, tilde3 = 0.0;
  double final_bound = 0.0;
  double practical() const { return std::min(tilde1, std::min(tilde2, tilde3)); }
};

AlphaBounds alpha_bound(const SpectralConstants& spec, double L_c, double L, int n);

/// L(x,y) = F_c(J_R x) + ||(I-J_R)x||_R^2 + kappa ||(I-J_C)y||_C^2.
double lyapunov_L(const DogtState& state, const LyapunovParams& params, const Eigen::VectorXd& r,
                  const Eigen::VectorXd& c, const ProblemInstance& problem);

/// d(x,y) >= 0, zero exactly at consensual critical points.
double merit_d(const DogtState& state, const LyapunovParams& params, const Eigen::VectorXd& r,
               const Eigen::VectorXd& c, const ProblemInstance& problem);

/// Stacked (grad_x L, grad_y L), 2nm entries.
Eigen::VectorXd grad_L(const DogtState& state, const LyapunovParams& params,
                       const Eigen::VectorXd& r, const Eigen::VectorXd& c,
                       const ProblemInstance& problem);

struct DogtRecord {
  long iter = 0;
  double L = 0.0;
  double d = 0.0;
  double cons_err = 0.0;  // ||x - 1 (x) xbar_r|| with the r-weighted mean
  double y_bar_norm = 0.0;
  double track_residual = 0.0;
  double grad_F_mean_norm = 0.0;
  Eigen::VectorXd x_bar;
};

struct DogtRunOptions {
  long max_iters = 10000;
  double merit_tol = 0.0;  // stop when d <= merit_tol (0 disables)
  long record_stride = 1;
  bool force = false;  // allow alpha beyond the practical bound
  std::vector<double> t_eps_thresholds;  // record first-passage times of d
};

struct DogtTrace {
  std::vector<DogtRecord> records;
  DogtState final_state;
  bool diverged = false;
  long diverged_at = -1;
  LyapunovParams params;            // constants used for L and d
  bool params_at_forced_alpha = false;  // false: evaluated at an admissible step
  std::vector<long> t_eps;          // aligned with t_eps_thresholds, -1 if never
  double sum_d_sq = 0.0;
};

/// Runs DOGT. Rejects alpha above the practical bound unless force is set; a
/// forced run evaluates the merit constants at an admissible step instead.
DogtTrace run_dogt(const ProblemInstance& problem, const MixingMatrix& R, const MixingMatrix& C,
                   double alpha, const Eigen::VectorXd& x0, YInitMode y_mode,
                   const DogtRunOptions& opts = {}, std::uint64_t y_seed = 0,
                   const std::function<void(const DogtState&, const DogtRecord&)>& observer = {});

enum class RateKind { Finite, Geometric, Sublinear };

struct RateClassification {
  RateKind kind = RateKind::Geometric;
  double tau = 0.0;       // geometric factor when kind == Geometric
  double exponent = 0.0;  // power-law exponent when kind == Sublinear
  double r_squared = 0.0;
};

/// Least-squares fit of log dist against nu (geometric) and log nu
/// (power law); diagnostic only.
RateClassification rate_classify(const std::vector<double>& dist_tail);

}  // namespace netopt
