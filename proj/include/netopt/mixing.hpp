#pragma once

#include <string>

#include <Eigen/Core>

#include "netopt/topology.hpp"

namespace netopt {

enum class StochasticKind { Row, Column, Doubly };

std::string to_string(StochasticKind k);

/// Nonnegative stochastic matrix compliant with a topology, together with its
/// Perron vectors: r is the stochastic left eigenvector at 1 (row/doubly
/// kinds), c the stochastic right eigenvector (column/doubly kinds).
struct MixingMatrix {
  Eigen::MatrixXd W;
  StochasticKind kind = StochasticKind::Doubly;
  Eigen::VectorXd perron_left;    // r, empty for pure column-stochastic
  Eigen::VectorXd perron_right;   // c, empty for pure row-stochastic

  int n() const { return static_cast<int>(W.rows()); }
  bool has_left() const { return perron_left.size() > 0; }
  bool has_right() const { return perron_right.size() > 0; }

  /// Worst row/column sum deviation from 1 (whichever sides the kind requires).
  double stochasticity_residual() const;
  /// max ||r^T W - r^T||, ||W c - c|| over the sides the kind carries.
  double perron_residual() const;
  /// True iff W_ij > 0 only where (j,i) is an edge or i == j.
  bool compliant_with(const Topology& topo) const;
};

/// Metropolis-Hastings weights on an undirected connected graph:
/// off-diagonal 1/(1+max(deg_i,deg_j)) on edges, diagonal absorbs the rest.
/// Symmetric and doubly-stochastic.
MixingMatrix metropolis_weights(const Topology& topo);

/// Uniform in-neighborhood averaging: R_ij = 1/|N_i^in| for j in N_i^in.
MixingMatrix row_stochastic_weights(const Topology& topo);

/// Uniform out-neighborhood splitting: C_ij = 1/|N_j^out| for i in N_j^out.
MixingMatrix col_stochastic_weights(const Topology& topo);

/// (M + (t-1) I)/t for t >= 1. Keeps kind and Perron vectors, makes the
/// diagonal strictly positive; t = 2 is the nonsingularity rule of thumb.
MixingMatrix lazy_transform(const MixingMatrix& M, double t);

/// Stochastic Perron vector at eigenvalue 1: left for row-stochastic input
/// (pass transpose_first=true to get it as an eigenvector of W^T), right for
/// column-stochastic. Dense eigensolve for n <= 64, power iteration above,
/// both polished to a 1e-12 residual.
Eigen::VectorXd perron_vector(const Eigen::MatrixXd& W, bool left);

/// Power-iteration path, exposed for testing. Throws on non-convergence
/// within max_iters.
Eigen::VectorXd perron_power_iteration(const Eigen::MatrixXd& W, bool left,
                                       double tol = 1e-12, int max_iters = 100000);

/// Contraction factors, Perron extrema, zeta and the norm-equivalence table
/// for a (R, C) pair satisfying the row/column-stochastic assumptions.
struct SpectralConstants {
  double rho_R = 0.0;
  double rho_C = 0.0;
  double sigma2 = 0.0;  // second-largest singular value, doubly-stochastic case
  double r_min = 0.0, r_max = 0.0;
  double c_min = 0.0, c_max = 0.0;
  double zeta = 0.0;  // r^T c
  double K_R2 = 0.0, K_2R = 0.0, K_C2 = 0.0, K_2C = 0.0, K_RC = 0.0, K_CR = 0.0;
};

SpectralConstants contraction_factors(const MixingMatrix& R, const MixingMatrix& C);

/// Weighted vector norms of the descent analysis. For stacked vectors pass
/// the block size m; v has n*m entries and weight i applies to block i.
double weighted_norm_R(const Eigen::VectorXd& v, const Eigen::VectorXd& r, int m = 1);
double weighted_norm_C(const Eigen::VectorXd& v, const Eigen::VectorXd& c, int m = 1);

/// ||W - 1 r^T||_R evaluated directly from the definition (sigma_max of the
/// similarity-scaled difference); the invariant suite checks it against rho_R.
double contraction_norm_R(const Eigen::MatrixXd& W, const Eigen::VectorXd& r);
double contraction_norm_C(const Eigen::MatrixXd& W, const Eigen::VectorXd& c);

/// Second-largest singular value.
double sigma2_of(const Eigen::MatrixXd& W);
/// sigma_min, via SVD.
double sigma_min_of(const Eigen::MatrixXd& W);

}  // namespace netopt
