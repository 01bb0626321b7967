#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "netopt/dgd.hpp"
#include "netopt/dogt.hpp"
#include "netopt/mixing.hpp"
#include "netopt/problem.hpp"

namespace netopt {

/// Embedding of a strict saddle theta* of F into the (x, h) state space:
/// u* = (1 (x) theta*, -grad F_c(1 (x) theta*)), a fixed point of the DOGT map.
struct ConsensualSaddle {
  Eigen::VectorXd theta_star;
  Eigen::VectorXd u_star;  // 2nm entries, x block then h block
  double lambda_min = 0.0;
  Eigen::VectorXd unstable_dir;
  double fixed_point_residual = 0.0;
};

ConsensualSaddle embed_consensual_saddle(const ProblemInstance& problem,
                                         const Eigen::VectorXd& theta_star, const MixingMatrix& R,
                                         const MixingMatrix& C, double alpha,
                                         double delta_tol = 1e-9, double stat_tol = 1e-6);

/// Orthonormal basis of span(W_C - I) as an nm x (n-1)m matrix
/// (basis of span(C - I) Kronecker I_m). Throws if rank(C - I) != n-1.
Eigen::MatrixXd basis_span(const MixingMatrix& C, int m);

/// The DOGT differential at a state, full and projected onto S.
struct JacobianBundle {
  Eigen::MatrixXd Dg_tilde;   // 2nm x 2nm
  Eigen::MatrixXd U_h;        // nm x (n-1)m
  Eigen::MatrixXd projected;  // (2n-1)m square, U^T Dg~ U
  Eigen::VectorXcd spectrum;  // of the projected operator
};

JacobianBundle assemble_Dg(const Eigen::VectorXd& x, const MixingMatrix& R, const MixingMatrix& C,
                           double alpha, const ProblemInstance& problem);

struct DiffeoCertificate {
  double alpha = 0.0;
  double alpha_bound = 0.0;  // sigma_min(C R)/L_c
  bool admissible = false;
  double min_sigma_projected = 0.0;  // over all probes
  double min_sigma_schur = 0.0;      // of W_R - alpha W_C^{-1} hess F_c
  bool passed = false;
};

/// Proposition-style nonsingularity check: requires nonsingular R and C,
/// asserts alpha < sigma_min(CR)/L_c, then probes random states.
DiffeoCertificate check_diffeomorphism(const MixingMatrix& R, const MixingMatrix& C, double alpha,
                                       const ProblemInstance& problem, int probe_count,
                                       std::uint64_t seed, double probe_scale = 1.0);

struct InstabilityCertificate {
  double spradii = 0.0;
  bool unstable = false;  // spradii > 1 + 1e-9
  std::complex<double> witness_eigenvalue;
  Eigen::VectorXd witness_eigenvector;  // real part, 2nm entries
  double witness_span_residual = 0.0;   // ||(I - P_S) v||
  double fixed_point_residual = 0.0;
  std::string conditions_used;  // "symmetric-weights" | "scalar" | "conditional"
};

/// Eigensolve of the projected differential at the consensual saddle.
/// Backed by the symmetric-weights condition, the m=1 condition, or reported
/// as conditional when neither holds.
InstabilityCertificate instability_certificate(const ConsensualSaddle& saddle,
                                               const MixingMatrix& R, const MixingMatrix& C,
                                               double alpha, const ProblemInstance& problem);

struct QScanReport {
  double q_at_one = 0.0;
  double q_one_scale = 0.0;          // sigma_min/sigma_max of T(1); ~0 certifies Q(1)=0
  bool sign_change_found = false;
  double bracket_lo = 0.0, bracket_hi = 0.0;
  double root = 0.0;  // bisection-refined when a sign change exists
  std::vector<std::pair<double, double>> samples;  // (lambda, sign(Q) * log|Q|)
};

/// Evaluates Q(lambda) = det((W_C - l I)(W_R - l I) + alpha (l-1) hess F_c*)
/// on a grid, reports Q(1) ~= 0 and brackets the first sign change above 1.
QScanReport q_scan(const ConsensualSaddle& saddle, const MixingMatrix& R, const MixingMatrix& C,
                   double alpha, const ProblemInstance& problem,
                   const std::vector<double>& lambda_grid, double bisect_tol = 1e-6);

struct DgdSaddleLinkReport {
  bool conditions_met = false;
  double dist_to_crit = 0.0;
  double cons_err = 0.0;
  double cond_i_bound = 0.0;   // delta / (2 L_hess)
  double cond_ii_bound = 0.0;  // delta / (2 n L_hess_c)
  double lambda_min_L_alpha = 0.0;
  double test_vector_value = 0.0;  // (1 (x) u)^T hess L_alpha (1 (x) u)
  bool strict_saddle_of_L_alpha = false;
};

/// Proposition-3.12-style check at a near-stationary DGD limit point against
/// the problem's known strict saddle. Zero Hessian-Lipschitz constants make
/// the distance conditions vacuous (bounds become +inf).
DgdSaddleLinkReport dgd_saddle_link(const Eigen::VectorXd& x_limit, const ProblemInstance& problem,
                                    const MixingMatrix& D, double alpha);

/// Lazy-parameter threshold t >= (C_P + 2 C_Q)^{d-1} C_P / (alpha delta / d)^d,
/// d = 2mn, with C_Q, C_P estimated over the known saddle set. Diagnostic:
/// values blow up beyond toy sizes.
double t_bound(const ProblemInstance& problem, const MixingMatrix& R_tilde,
               const MixingMatrix& C_tilde, double alpha, double delta);

enum class EscapeAlgo { Dgd, Dogt };

struct EscapeSeedResult {
  std::uint64_t seed = 0;
  double proj_initial = 0.0, proj_final = 0.0;
  double dist_initial = 0.0, dist_final = 0.0;
  bool escaped_proj = false;
  bool escaped_dist = false;
  double final_grad_norm = 0.0;
  double merit_M = 0.0;  // max(dist to SoS set, consensus error), when known
};

struct EscapeReport {
  std::vector<EscapeSeedResult> seeds;
  double frequency = 0.0;  // fraction with both escape flags
};

struct EscapeConfig {
  double init_std = 1.0;  // Gaussian perturbation around the saddle
  long iters = 6000;
  double alpha = 0.0;
  double escape_factor = 10.0;
  long record_stride = 50;
};

/// Seeded escape-frequency proxy for the measure-one claims: initializes in a
/// Gaussian neighborhood of the saddle and measures growth of the unstable
/// projection and of the distance to the saddle.
EscapeReport escape_statistics(const ProblemInstance& problem, EscapeAlgo algo,
                               const ConsensualSaddle& saddle, const MixingMatrix& R,
                               const MixingMatrix& C, const EscapeConfig& config, int num_seeds,
                               std::uint64_t base_seed);

}  // namespace netopt
