#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netopt/problem.hpp"

namespace netopt {

struct QuadraticOptions {
  double b_std = 1e3;   // std of the Gaussian shifts b_i
  bool convex = false;  // flip the negative eigenvalue to +n*delta
};

/// F(theta) = 1/2 sum_i (theta - b_i)^T Q_i (theta - b_i). Sum of the Q_i has
/// m-1 eigenvalues uniform on (0, n] and one at -n*delta (+n*delta for the
/// convexified variant). Registers the unique critical point
/// theta* = (sum Q_i)^{-1} sum Q_i b_i with its classification.
ProblemInstance quadratic_saddle(int m, int n, double delta, std::uint64_t seed,
                                 const QuadraticOptions& opts = {});

/// Quadratic problem from explicit (Q_i, b_i) data; registers theta* when
/// sum Q_i is invertible.
ProblemInstance quadratic_from_data(const std::vector<Eigen::MatrixXd>& Q_list,
                                    const std::vector<Eigen::VectorXd>& b_list);

/// f_i(theta) = 1/4 { (1/n) |theta theta^T|_F^2 - 2 theta^T M_i theta }.
ProblemInstance distributed_pca(const std::vector<Eigen::MatrixXd>& M_list);

/// f_i(theta) = 1/4 ((a_i^T theta)^2 - y_i)^2 + lambda/(2n) |theta|^2.
ProblemInstance phase_retrieval(const std::vector<Eigen::VectorXd>& a_list,
                                const std::vector<double>& y_list, double lambda);

/// f_i(T) = 1/4 (tr(T^T A_i T) - y_i)^2 + lambda/(2n) |T|_F^2, T in R^{mxr}
/// flattened column-major.
ProblemInstance matrix_sensing(const std::vector<Eigen::MatrixXd>& A_list,
                               const std::vector<double>& y_list, double lambda, int r);

/// f_i(theta) = -log( sum_d phi(z_i - theta_d) ) + lambda/2 sum_d |theta_d|^2,
/// phi the N(0, sigma_tilde^2 I) density; theta stacks q mean estimates.
ProblemInstance gaussian_mixture(const std::vector<Eigen::VectorXd>& z_list,
                                 double sigma_tilde, int q, double lambda = 0.0);

/// f_i(Q,w) = 1/n [ -ln sigma(xi~_i s_i^T Q w) + tau/2 (|Q|_F^2 + |w|^2) ],
/// labels xi in {0,1} remapped to {-1,+1}. Variable is (vec(Q), w).
/// Registers (0,0) as a critical point with its Hessian classification.
ProblemInstance bilinear_logistic(const std::vector<Eigen::VectorXd>& s_list,
                                  const std::vector<int>& xi_list, double tau, int d, int p);

enum class NeuronVariant { SquaredSigmoid, Tanh, SigmoidSq, LogSigmoidGap };

NeuronVariant neuron_variant_from_string(const std::string& s);

/// The four binary-classification single-neuron losses.
ProblemInstance neuron_losses(const std::vector<Eigen::VectorXd>& s_list,
                              const std::vector<double>& xi_list, NeuronVariant variant,
                              double lambda, double mu = 0.0);

/// Annulus-condition certificate over the shell R-eps <= |theta| <= R.
struct AnnulusCertificate {
  double R = 0.0;
  double eps = 0.0;
  double delta = 0.0;  // sampled infimum of min_i <grad f_i, theta/|theta|>
  bool certified = false;
  std::string method;  // "sampled-infimum"
  std::optional<double> closed_form_bound;
};

AnnulusCertificate annulus_margin(const ProblemInstance& problem, double R, double eps,
                                  int sample_count, std::uint64_t seed);

/// Radial margin integrand min_i <grad f_i(theta), theta/|theta|> at a point;
/// the certificate samples this over the shell.
double radial_margin_at(const ProblemInstance& problem, const Eigen::VectorXd& theta);

struct CriticalClassification {
  CriticalKind kind = CriticalKind::LocalMinCandidate;
  double lambda_min = 0.0;
  Eigen::VectorXd unstable_dir;  // eigvec of lambda_min
};

/// Classifies a stationary point of F. Throws if |grad F| exceeds stat_tol.
CriticalClassification classify_critical(const ProblemInstance& problem,
                                         const Eigen::VectorXd& theta, double delta_tol,
                                         double stat_tol = 1e-6);

/// Samples |hess f_i| over a centered ball to estimate the gradient-Lipschitz
/// constants (x1.5 safety factor), and difference quotients for the
/// Hessian-Lipschitz ones. Used by builders lacking closed-form constants.
SmoothnessData estimate_smoothness(const std::vector<std::shared_ptr<const LocalOracle>>& oracles,
                                   int m, double radius, int samples, std::uint64_t seed);

}  // namespace netopt
