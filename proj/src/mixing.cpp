#include "netopt/mixing.hpp"

#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace netopt {

namespace {

constexpr double kStochasticTol = 1e-12;

Eigen::VectorXd polish_perron(const Eigen::MatrixXd& A, Eigen::VectorXd v, double tol, int iters) {
  // A is W^T for the left vector, W for the right one; v is the current guess.
  for (int k = 0; k < iters; ++k) {
    if ((A * v - v).norm() <= tol) break;
    v = A * v;
    v /= v.sum();
  }
  return v;
}

}  // namespace

std::string to_string(StochasticKind k) {
  switch (k) {
    case StochasticKind::Row: return "row-stochastic";
    case StochasticKind::Column: return "column-stochastic";
    case StochasticKind::Doubly: return "doubly-stochastic";
  }
  return "?";
}

double MixingMatrix::stochasticity_residual() const {
  double res = 0.0;
  if (kind != StochasticKind::Column)
    res = std::max(res, (W.rowwise().sum().array() - 1.0).abs().maxCoeff());
  if (kind != StochasticKind::Row)
    res = std::max(res, (W.colwise().sum().array() - 1.0).abs().maxCoeff());
  return res;
}

double MixingMatrix::perron_residual() const {
  double res = 0.0;
  if (has_left()) res = std::max(res, (W.transpose() * perron_left - perron_left).norm());
  if (has_right()) res = std::max(res, (W * perron_right - perron_right).norm());
  return res;
}

bool MixingMatrix::compliant_with(const Topology& topo) const {
  for (int i = 0; i < n(); ++i)
    for (int j = 0; j < n(); ++j)
      if (i != j && W(i, j) > 0.0 && !topo.has_edge(j, i)) return false;
  return true;
}

MixingMatrix metropolis_weights(const Topology& topo) {
  if (topo.directed) throw std::invalid_argument("metropolis_weights requires an undirected topology");
  if (!topo.is_connected()) throw std::invalid_argument("metropolis_weights requires a connected topology");
  const int n = topo.n;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [a, b] : topo.edges) {
    const double w = 1.0 / (1.0 + std::max(topo.degree(a), topo.degree(b)));
    W(a, b) = w;
    W(b, a) = w;
  }
  for (int i = 0; i < n; ++i) W(i, i) = 1.0 - W.row(i).sum();
  MixingMatrix M;
  M.W = std::move(W);
  M.kind = StochasticKind::Doubly;
  M.perron_left = Eigen::VectorXd::Constant(n, 1.0 / n);
  M.perron_right = M.perron_left;
  return M;
}

MixingMatrix row_stochastic_weights(const Topology& topo) {
  if (!topo.is_connected()) throw std::invalid_argument("row_stochastic_weights requires a (strongly) connected topology");
  const int n = topo.n;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const auto nbrs = topo.in_neighbors(i);
    for (int j : nbrs) W(i, j) = 1.0 / static_cast<double>(nbrs.size());
  }
  MixingMatrix M;
  M.W = std::move(W);
  M.kind = StochasticKind::Row;
  M.perron_left = perron_vector(M.W, /*left=*/true);
  // uniform in-degrees make the matrix doubly stochastic; detect and upgrade
  if ((M.W.colwise().sum().array() - 1.0).abs().maxCoeff() <= kStochasticTol) {
    M.kind = StochasticKind::Doubly;
    M.perron_right = perron_vector(M.W, /*left=*/false);
  }
  return M;
}

MixingMatrix col_stochastic_weights(const Topology& topo) {
  if (!topo.is_connected()) throw std::invalid_argument("col_stochastic_weights requires a (strongly) connected topology");
  const int n = topo.n;
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const auto nbrs = topo.out_neighbors(j);
    for (int i : nbrs) W(i, j) = 1.0 / static_cast<double>(nbrs.size());
  }
  MixingMatrix M;
  M.W = std::move(W);
  M.kind = StochasticKind::Column;
  M.perron_right = perron_vector(M.W, /*left=*/false);
  if ((M.W.rowwise().sum().array() - 1.0).abs().maxCoeff() <= kStochasticTol) {
    M.kind = StochasticKind::Doubly;
    M.perron_left = perron_vector(M.W, /*left=*/true);
  }
  return M;
}

MixingMatrix lazy_transform(const MixingMatrix& M, double t) {
  if (t < 1.0) throw std::invalid_argument("lazy_transform requires t >= 1");
  MixingMatrix out = M;
  const int n = M.n();
  out.W = (M.W + (t - 1.0) * Eigen::MatrixXd::Identity(n, n)) / t;
  // (M + (t-1)I)/t has the same Perron vectors as M.
  return out;
}

Eigen::VectorXd perron_power_iteration(const Eigen::MatrixXd& W, bool left, double tol, int max_iters) {
  const Eigen::MatrixXd A = left ? W.transpose() : W;
  const int n = static_cast<int>(W.rows());
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / n);
  for (int k = 0; k < max_iters; ++k) {
    Eigen::VectorXd next = A * v;
    next /= next.sum();
    if ((A * next - next).norm() <= tol) return next;
    v = std::move(next);
  }
  throw std::runtime_error("perron power iteration did not reach the residual tolerance");
}

Eigen::VectorXd perron_vector(const Eigen::MatrixXd& W, bool left) {
  const int n = static_cast<int>(W.rows());
  if (n == 1) return Eigen::VectorXd::Ones(1);
  if (n > 64) return perron_power_iteration(W, left);

  const Eigen::MatrixXd A = left ? Eigen::MatrixXd(W.transpose()) : W;
  Eigen::EigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) throw std::runtime_error("perron eigensolve failed");
  int best = 0;
  double best_dist = std::abs(es.eigenvalues()(0) - std::complex<double>(1.0, 0.0));
  for (int i = 1; i < n; ++i) {
    const double d = std::abs(es.eigenvalues()(i) - std::complex<double>(1.0, 0.0));
    if (d < best_dist) {
      best = i;
      best_dist = d;
    }
  }
  Eigen::VectorXd v = es.eigenvectors().col(best).real();
  if (v.sum() < 0.0) v = -v;
  const double s = v.sum();
  if (std::abs(s) < 1e-300) throw std::runtime_error("degenerate perron eigenvector");
  v /= s;
  v = polish_perron(A, std::move(v), 1e-13, 50);
  if (v.minCoeff() < -1e-10) throw std::runtime_error("perron vector has negative entries");
  v = v.cwiseMax(0.0);
  v /= v.sum();
  return v;
}

double sigma2_of(const Eigen::MatrixXd& W) {
  if (W.rows() < 2) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
  return svd.singularValues()(1);
}

double sigma_min_of(const Eigen::MatrixXd& W) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(W);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

double weighted_norm_R(const Eigen::VectorXd& v, const Eigen::VectorXd& r, int m) {
  const int n = static_cast<int>(r.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += r(i) * v.segment(i * m, m).squaredNorm();
  return std::sqrt(acc);
}

double weighted_norm_C(const Eigen::VectorXd& v, const Eigen::VectorXd& c, int m) {
  const int n = static_cast<int>(c.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += v.segment(i * m, m).squaredNorm() / c(i);
  return std::sqrt(acc);
}

double contraction_norm_R(const Eigen::MatrixXd& W, const Eigen::VectorXd& r) {
  const Eigen::VectorXd s = r.array().sqrt();
  const Eigen::MatrixXd D = s.asDiagonal();
  const Eigen::MatrixXd Dinv = s.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd diff = W - Eigen::VectorXd::Ones(W.rows()) * r.transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(D * diff * Dinv);
  return svd.singularValues()(0);
}

double contraction_norm_C(const Eigen::MatrixXd& W, const Eigen::VectorXd& c) {
  const Eigen::VectorXd s = c.array().sqrt();
  const Eigen::MatrixXd D = s.asDiagonal();
  const Eigen::MatrixXd Dinv = s.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd diff = W - c * Eigen::RowVectorXd::Ones(W.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Dinv * diff * D);
  return svd.singularValues()(0);
}

SpectralConstants contraction_factors(const MixingMatrix& R, const MixingMatrix& C) {
  if (!R.has_left()) throw std::invalid_argument("R must carry a left Perron vector");
  if (!C.has_right()) throw std::invalid_argument("C must carry a right Perron vector");
  const Eigen::VectorXd& r = R.perron_left;
  const Eigen::VectorXd& c = C.perron_right;
  if (r.minCoeff() <= 0.0 || c.minCoeff() <= 0.0)
    throw std::invalid_argument("degenerate graph: Perron vector has a zero entry");

  SpectralConstants s;
  s.r_min = r.minCoeff();
  s.r_max = r.maxCoeff();
  s.c_min = c.minCoeff();
  s.c_max = c.maxCoeff();
  s.zeta = r.dot(c);

  if (R.n() == 1) {
    s.rho_R = s.rho_C = s.sigma2 = 0.0;
  } else {
    const Eigen::VectorXd sr = r.array().sqrt();
    s.rho_R = sigma2_of(Eigen::MatrixXd(sr.asDiagonal()) * R.W *
                        Eigen::MatrixXd(sr.cwiseInverse().asDiagonal()));
    const Eigen::VectorXd sc = c.array().sqrt();
    s.rho_C = sigma2_of(Eigen::MatrixXd(sc.cwiseInverse().asDiagonal()) * C.W *
                        Eigen::MatrixXd(sc.asDiagonal()));
    s.sigma2 = sigma2_of(R.W);  // meaningful when R is doubly-stochastic
  }

  s.K_R2 = std::sqrt(s.r_max);
  s.K_2R = 1.0 / std::sqrt(s.r_min);
  s.K_C2 = 1.0 / std::sqrt(s.c_min);
  s.K_2C = std::sqrt(s.c_max);
  s.K_RC = std::sqrt(s.r_max * s.c_max);
  s.K_CR = 1.0 / std::sqrt(s.c_min * s.r_min);
  return s;
}

}  // namespace netopt
