#include "netopt/problems.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "netopt/rng.hpp"

namespace netopt {

namespace {

double sigmoid(double u) { return u >= 0.0 ? 1.0 / (1.0 + std::exp(-u)) : std::exp(u) / (1.0 + std::exp(u)); }
double softplus(double u) { return u > 30.0 ? u : std::log1p(std::exp(u)); }  // log(1+e^u)

double sym_opnorm(const Eigen::MatrixXd& H) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Quadratic: f_i = 1/2 (theta-b_i)^T Q_i (theta-b_i)
// ---------------------------------------------------------------------------
class QuadraticOracle final : public LocalOracle {
 public:
  QuadraticOracle(Eigen::MatrixXd Q, Eigen::VectorXd b) : Q_(std::move(Q)), b_(std::move(b)) {}
  double value(const Eigen::VectorXd& t) const override {
    const Eigen::VectorXd d = t - b_;
    return 0.5 * d.dot(Q_ * d);
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& t) const override { return Q_ * (t - b_); }
  Eigen::MatrixXd hess(const Eigen::VectorXd&) const override { return Q_; }

 private:
  Eigen::MatrixXd Q_;
  Eigen::VectorXd b_;
};

// ---------------------------------------------------------------------------
// Distributed PCA split
// ---------------------------------------------------------------------------
class PcaOracle final : public LocalOracle {
 public:
  PcaOracle(Eigen::MatrixXd M_sym, int n) : M_(std::move(M_sym)), n_(n) {}
  double value(const Eigen::VectorXd& t) const override {
    const double tt = t.squaredNorm();
    return 0.25 * (tt * tt / n_ - 2.0 * t.dot(M_ * t));
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& t) const override {
    return (t.squaredNorm() / n_) * t - M_ * t;
  }
  Eigen::MatrixXd hess(const Eigen::VectorXd& t) const override {
    const int m = static_cast<int>(t.size());
    return (t.squaredNorm() / n_) * Eigen::MatrixXd::Identity(m, m) +
           (2.0 / n_) * (t * t.transpose()) - M_;
  }

 private:
  Eigen::MatrixXd M_;
  int n_;
};

// ---------------------------------------------------------------------------
// Phase retrieval
// ---------------------------------------------------------------------------
class PhaseRetrievalOracle final : public LocalOracle {
 public:
  PhaseRetrievalOracle(Eigen::VectorXd a, double y, double reg) : a_(std::move(a)), y_(y), reg_(reg) {}
  double value(const Eigen::VectorXd& t) const override {
    const double s = std::pow(a_.dot(t), 2);
    return 0.25 * std::pow(s - y_, 2) + 0.5 * reg_ * t.squaredNorm();
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& t) const override {
    const double at = a_.dot(t);
    return (at * at - y_) * at * a_ + reg_ * t;
  }
  Eigen::MatrixXd hess(const Eigen::VectorXd& t) const override {
    const double s = std::pow(a_.dot(t), 2);
    const int m = static_cast<int>(t.size());
    return (3.0 * s - y_) * (a_ * a_.transpose()) + reg_ * Eigen::MatrixXd::Identity(m, m);
  }

 private:
  Eigen::VectorXd a_;
  double y_;
  double reg_;  // lambda/n
};

// ---------------------------------------------------------------------------
// Matrix sensing, T flattened column-major
// ---------------------------------------------------------------------------
class MatrixSensingOracle final : public LocalOracle {
 public:
  MatrixSensingOracle(Eigen::MatrixXd A, double y, double reg, int rows, int cols)
      : A_(std::move(A)), As_(A_ + A_.transpose()), y_(y), reg_(reg), rows_(rows), cols_(cols) {}

  double value(const Eigen::VectorXd& t) const override {
    const auto T = as_matrix(t);
    const double phi = (T.transpose() * A_ * T).trace();
    return 0.25 * std::pow(phi - y_, 2) + 0.5 * reg_ * t.squaredNorm();
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& t) const override {
    const auto T = as_matrix(t);
    const double phi = (T.transpose() * A_ * T).trace();
    Eigen::MatrixXd G = 0.5 * (phi - y_) * (As_ * T);
    return Eigen::Map<const Eigen::VectorXd>(G.data(), G.size()) + reg_ * t;
  }
  Eigen::MatrixXd hess(const Eigen::VectorXd& t) const override {
    const auto T = as_matrix(t);
    const double phi = (T.transpose() * A_ * T).trace();
    Eigen::MatrixXd Gm = As_ * T;
    const Eigen::Map<const Eigen::VectorXd> g(Gm.data(), Gm.size());
    Eigen::MatrixXd H = 0.5 * (g * g.transpose());
    for (int k = 0; k < cols_; ++k)
      H.block(k * rows_, k * rows_, rows_, rows_) += 0.5 * (phi - y_) * As_;
    H += reg_ * Eigen::MatrixXd::Identity(t.size(), t.size());
    return H;
  }

 private:
  Eigen::Map<const Eigen::MatrixXd> as_matrix(const Eigen::VectorXd& t) const {
    return {t.data(), rows_, cols_};
  }
  Eigen::MatrixXd A_, As_;
  double y_;
  double reg_;
  int rows_, cols_;
};

// ---------------------------------------------------------------------------
// Gaussian mixture negative log-likelihood
// ---------------------------------------------------------------------------
class GaussianMixtureOracle final : public LocalOracle {
 public:
  GaussianMixtureOracle(Eigen::VectorXd z, double sigma, int q, double lambda)
      : z_(std::move(z)), s2_(sigma * sigma), q_(q), lambda_(lambda),
        log_norm_(-0.5 * z_.size() * std::log(2.0 * M_PI * s2_)) {}

  double value(const Eigen::VectorXd& t) const override {
    return -lse(t) + 0.5 * lambda_ * t.squaredNorm();
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& t) const override {
    const int mz = static_cast<int>(z_.size());
    const Eigen::VectorXd w = weights(t);
    Eigen::VectorXd g(t.size());
    for (int d = 0; d < q_; ++d) {
      const Eigen::VectorXd u = (z_ - t.segment(d * mz, mz)) / s2_;
      g.segment(d * mz, mz) = -w(d) * u + lambda_ * t.segment(d * mz, mz);
    }
    return g;
  }
  Eigen::MatrixXd hess(const Eigen::VectorXd& t) const override {
    const int mz = static_cast<int>(z_.size());
    const Eigen::VectorXd w = weights(t);
    std::vector<Eigen::VectorXd> u(q_);
    for (int d = 0; d < q_; ++d) u[d] = (z_ - t.segment(d * mz, mz)) / s2_;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(t.size(), t.size());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(mz, mz);
    for (int d = 0; d < q_; ++d) {
      for (int e = 0; e < q_; ++e) {
        Eigen::MatrixXd blk = w(d) * w(e) * (u[d] * u[e].transpose());
        if (d == e) blk += w(d) * (I / s2_ - u[d] * u[d].transpose()) + lambda_ * I;
        H.block(d * mz, e * mz, mz, mz) = blk;
      }
    }
    return H;
  }

 private:
  Eigen::VectorXd log_phis(const Eigen::VectorXd& t) const {
    const int mz = static_cast<int>(z_.size());
    Eigen::VectorXd lp(q_);
    for (int d = 0; d < q_; ++d)
      lp(d) = log_norm_ - (z_ - t.segment(d * mz, mz)).squaredNorm() / (2.0 * s2_);
    return lp;
  }
  double lse(const Eigen::VectorXd& t) const {
    const Eigen::VectorXd lp = log_phis(t);
    const double mx = lp.maxCoeff();
    return mx + std::log((lp.array() - mx).exp().sum());
  }
  Eigen::VectorXd weights(const Eigen::VectorXd& t) const {
    const Eigen::VectorXd lp = log_phis(t);
    const double l = lse(t);
    return (lp.array() - l).exp();
  }

  Eigen::VectorXd z_;
  double s2_;
  int q_;
  double lambda_;
  double log_norm_;
};

// ---------------------------------------------------------------------------
// Bilinear logistic regression, variable (vec(Q), w)
// ---------------------------------------------------------------------------
class BilinearLogisticOracle final : public LocalOracle {
 public:
  BilinearLogisticOracle(Eigen::VectorXd s, double xi_pm, double tau, int n, int d, int p)
      : s_(std::move(s)), xi_(xi_pm), tau_(tau), n_(n), d_(d), p_(p) {}

  double value(const Eigen::VectorXd& t) const override {
    const auto [Q, w] = split(t);
    const double u = xi_ * s_.dot(Q * w);
    return (softplus(-u) + 0.5 * tau_ * t.squaredNorm()) / n_;
  }
  Eigen::VectorXd grad(const Eigen::VectorXd& t) const override {
    const auto [Q, w] = split(t);
    const double u = xi_ * s_.dot(Q * w);
    const double a = sigmoid(-u);
    Eigen::VectorXd g(t.size());
    Eigen::MatrixXd gQ = -a * xi_ * (s_ * w.transpose());
    g.head(d_ * p_) = Eigen::Map<const Eigen::VectorXd>(gQ.data(), gQ.size());
    g.tail(p_) = -a * xi_ * (Q.transpose() * s_);
    g += tau_ * t;
    return g / n_;
  }
  Eigen::MatrixXd hess(const Eigen::VectorXd& t) const override {
    const auto [Q, w] = split(t);
    const double u = xi_ * s_.dot(Q * w);
    const double a = sigmoid(-u);
    const double b = sigmoid(u) * a;  // sigma'(u)
    // gradient of u wrt (vec(Q), w)
    Eigen::VectorXd gu(t.size());
    Eigen::MatrixXd guQ = xi_ * (s_ * w.transpose());
    gu.head(d_ * p_) = Eigen::Map<const Eigen::VectorXd>(guQ.data(), guQ.size());
    gu.tail(p_) = xi_ * (Q.transpose() * s_);
    Eigen::MatrixXd H = b * (gu * gu.transpose());
    // -a * hess(u): only the Q-w cross blocks are nonzero
    for (int bcol = 0; bcol < p_; ++bcol)
      for (int arow = 0; arow < d_; ++arow) {
        const int qi = arow + bcol * d_;
        const int wi = d_ * p_ + bcol;
        H(qi, wi) += -a * xi_ * s_(arow);
        H(wi, qi) += -a * xi_ * s_(arow);
      }
    H += tau_ * Eigen::MatrixXd::Identity(t.size(), t.size());
    return H / n_;
  }

 private:
  std::pair<Eigen::Map<const Eigen::MatrixXd>, Eigen::Map<const Eigen::VectorXd>> split(
      const Eigen::VectorXd& t) const {
    return {Eigen::Map<const Eigen::MatrixXd>(t.data(), d_, p_),
            Eigen::Map<const Eigen::VectorXd>(t.data() + d_ * p_, p_)};
  }
  Eigen::VectorXd s_;
  double xi_;
  double tau_;
  int n_, d_, p_;
};

// ---------------------------------------------------------------------------
// Single-neuron losses
// ---------------------------------------------------------------------------
class NeuronOracle final : public LocalOracle {
 public:
  NeuronOracle(Eigen::VectorXd s, double xi, NeuronVariant variant, double lambda, double mu, int n)
      : s_(std::move(s)), xi_(xi), variant_(variant), lambda_(lambda), mu_(mu), n_(n) {}

  double value(const Eigen::VectorXd& t) const override {
    switch (variant_) {
      case NeuronVariant::SquaredSigmoid: {
        const double e = xi_ - sigmoid(s_.dot(t));
        return (0.5 * e * e + 0.25 * lambda_ * t.squaredNorm()) / n_;
      }
      case NeuronVariant::Tanh:
        return 1.0 - std::tanh(xi_ * s_.dot(t)) + 0.5 * lambda_ * t.squaredNorm();
      case NeuronVariant::SigmoidSq: {
        const double a = 1.0 - sigmoid(xi_ * s_.dot(t));
        return a * a + 0.5 * lambda_ * t.squaredNorm();
      }
      case NeuronVariant::LogSigmoidGap: {
        const double v = xi_ * s_.dot(t);
        return softplus(-v) - softplus(-(v + mu_)) + 0.5 * lambda_ * t.squaredNorm();
      }
    }
    return 0.0;
  }

  Eigen::VectorXd grad(const Eigen::VectorXd& t) const override {
    switch (variant_) {
      case NeuronVariant::SquaredSigmoid: {
        const double u = s_.dot(t);
        const double sg = sigmoid(u);
        const double sp = sg * (1.0 - sg);
        return (-(xi_ - sg) * sp * s_ + 0.5 * lambda_ * t) / n_;
      }
      case NeuronVariant::Tanh: {
        const double v = xi_ * s_.dot(t);
        const double sech2 = 1.0 - std::pow(std::tanh(v), 2);
        return -sech2 * xi_ * s_ + lambda_ * t;
      }
      case NeuronVariant::SigmoidSq: {
        const double v = xi_ * s_.dot(t);
        const double sg = sigmoid(v);
        return -2.0 * (1.0 - sg) * sg * (1.0 - sg) * xi_ * s_ + lambda_ * t;
      }
      case NeuronVariant::LogSigmoidGap: {
        const double v = xi_ * s_.dot(t);
        return (sigmoid(v) - sigmoid(v + mu_)) * xi_ * s_ + lambda_ * t;
      }
    }
    return Eigen::VectorXd::Zero(t.size());
  }

  Eigen::MatrixXd hess(const Eigen::VectorXd& t) const override {
    const int m = static_cast<int>(t.size());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(m, m);
    const Eigen::MatrixXd S = s_ * s_.transpose();
    switch (variant_) {
      case NeuronVariant::SquaredSigmoid: {
        const double u = s_.dot(t);
        const double sg = sigmoid(u);
        const double sp = sg * (1.0 - sg);
        const double spp = sp * (1.0 - 2.0 * sg);
        return ((sp * sp - (xi_ - sg) * spp) * S + 0.5 * lambda_ * I) / n_;
      }
      case NeuronVariant::Tanh: {
        const double v = xi_ * s_.dot(t);
        const double th = std::tanh(v);
        return 2.0 * (1.0 - th * th) * th * xi_ * xi_ * S + lambda_ * I;
      }
      case NeuronVariant::SigmoidSq: {
        const double v = xi_ * s_.dot(t);
        const double sg = sigmoid(v);
        const double sp = sg * (1.0 - sg);
        const double spp = sp * (1.0 - 2.0 * sg);
        return (2.0 * sp * sp - 2.0 * (1.0 - sg) * spp) * xi_ * xi_ * S + lambda_ * I;
      }
      case NeuronVariant::LogSigmoidGap: {
        const double v = xi_ * s_.dot(t);
        const double sp_v = sigmoid(v) * (1.0 - sigmoid(v));
        const double sp_vm = sigmoid(v + mu_) * (1.0 - sigmoid(v + mu_));
        return (sp_v - sp_vm) * xi_ * xi_ * S + lambda_ * I;
      }
    }
    return Eigen::MatrixXd::Zero(m, m);
  }

 private:
  Eigen::VectorXd s_;
  double xi_;
  NeuronVariant variant_;
  double lambda_;
  double mu_;
  int n_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

ProblemInstance quadratic_saddle(int m, int n, double delta, std::uint64_t seed,
                                 const QuadraticOptions& opts) {
  if (m < 1 || n < 1) throw std::invalid_argument("quadratic_saddle requires m >= 1, n >= 1");
  if (!opts.convex && m < 2 && n < 1) throw std::invalid_argument("bad dimensions");
  if (delta <= 0.0) throw std::invalid_argument("quadratic_saddle requires delta > 0");

  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(seed + attempt);
    // random rotation: QR of a Gaussian matrix, signs fixed for determinism
    Eigen::MatrixXd G = rng.normal_matrix(m, m);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd U = qr.householderQ();
    const Eigen::MatrixXd Rfac = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int k = 0; k < m; ++k)
      if (Rfac(k, k) < 0.0) U.col(k) *= -1.0;

    Eigen::VectorXd lambda(m);
    for (int k = 0; k + 1 < m; ++k) lambda(k) = n * rng.uniform();
    lambda(m - 1) = (opts.convex ? 1.0 : -1.0) * n * delta;
    if (lambda.cwiseAbs().minCoeff() < 1e-12 * n) continue;  // singular draw, retry

    // Split each eigenvalue across agents with positive random weights; the
    // per-agent pieces keep the sign, so sigma_max(Q_i) <= max_k |lambda_k|.
    Eigen::MatrixXd shares(n, m);
    for (int k = 0; k < m; ++k) {
      Eigen::VectorXd w(n);
      for (int i = 0; i < n; ++i) w(i) = rng.uniform(0.5, 1.5);
      shares.col(k) = lambda(k) * w / w.sum();
    }

    ProblemInstance prob;
    prob.name = opts.convex ? "quadratic-convex" : "quadratic-saddle";
    prob.n = n;
    prob.m = m;
    prob.smoothness.L_i.resize(n);
    prob.smoothness.L_hess_i = Eigen::VectorXd::Zero(n);

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);  // sum_i Q_i b_i
    for (int i = 0; i < n; ++i) {
      const Eigen::MatrixXd Qi = U * shares.row(i).asDiagonal() * U.transpose();
      const Eigen::VectorXd bi = rng.normal_vector(m, opts.b_std);
      rhs += Qi * bi;
      prob.smoothness.L_i(i) = shares.row(i).cwiseAbs().maxCoeff();
      prob.oracles.push_back(std::make_shared<QuadraticOracle>(Qi, bi));
    }
    prob.smoothness.finalize();

    const Eigen::MatrixXd A = U * lambda.asDiagonal() * U.transpose();
    const Eigen::VectorXd theta_star = A.ldlt().solve(rhs);

    KnownCritical crit;
    crit.theta = theta_star;
    crit.lambda_min = lambda.minCoeff();
    if (opts.convex) {
      crit.kind = CriticalKind::LocalMinCandidate;
    } else {
      crit.kind = CriticalKind::StrictSaddle;
      crit.unstable_dir = U.col(m - 1);
    }
    prob.known_criticals.push_back(std::move(crit));
    return prob;
  }
}

ProblemInstance quadratic_from_data(const std::vector<Eigen::MatrixXd>& Q_list,
                                    const std::vector<Eigen::VectorXd>& b_list) {
  if (Q_list.empty() || Q_list.size() != b_list.size())
    throw std::invalid_argument("quadratic_from_data: Q_list and b_list must be equal-length and nonempty");
  const int n = static_cast<int>(Q_list.size());
  const int m = static_cast<int>(Q_list[0].rows());
  ProblemInstance prob;
  prob.name = "quadratic-custom";
  prob.n = n;
  prob.m = m;
  prob.smoothness.L_i.resize(n);
  prob.smoothness.L_hess_i = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < n; ++i) {
    if (Q_list[i].rows() != m || Q_list[i].cols() != m || b_list[i].size() != m)
      throw std::invalid_argument("quadratic_from_data: inconsistent dimensions");
    A += Q_list[i];
    rhs += Q_list[i] * b_list[i];
    prob.smoothness.L_i(i) = sym_opnorm(0.5 * (Q_list[i] + Q_list[i].transpose()));
    prob.oracles.push_back(std::make_shared<QuadraticOracle>(Q_list[i], b_list[i]));
  }
  prob.smoothness.finalize();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (lu.isInvertible()) {
    KnownCritical crit;
    crit.theta = lu.solve(rhs);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()));
    crit.lambda_min = es.eigenvalues()(0);
    crit.kind = crit.lambda_min < 0.0 ? CriticalKind::StrictSaddle : CriticalKind::LocalMinCandidate;
    if (crit.kind == CriticalKind::StrictSaddle) crit.unstable_dir = es.eigenvectors().col(0);
    prob.known_criticals.push_back(std::move(crit));
  }
  return prob;
}

ProblemInstance distributed_pca(const std::vector<Eigen::MatrixXd>& M_list) {
  if (M_list.empty()) throw std::invalid_argument("distributed_pca needs at least one matrix");
  const int m = static_cast<int>(M_list[0].rows());
  const int n = static_cast<int>(M_list.size());
  double sig_max = 0.0;
  ProblemInstance prob;
  prob.name = "distributed-pca";
  prob.n = n;
  prob.m = m;
  for (const auto& M : M_list) {
    if (M.rows() != m || M.cols() != m) throw std::invalid_argument("distributed_pca: matrices must be square and same size");
    const Eigen::MatrixXd Ms = 0.5 * (M + M.transpose());
    sig_max = std::max(sig_max, sym_opnorm(Ms));
    prob.oracles.push_back(std::make_shared<PcaOracle>(Ms, n));
  }
  prob.smoothness = estimate_smoothness(prob.oracles, m, 2.0 * std::sqrt(sig_max * n) + 1.0, 64, 17);
  // l2<->l4 equivalence constant K^4 = m
  prob.radial_lower_bound = [n, m, sig_max](double r) {
    return r * r * r / (static_cast<double>(n) * m) - sig_max * r;
  };
  return prob;
}

ProblemInstance phase_retrieval(const std::vector<Eigen::VectorXd>& a_list,
                                const std::vector<double>& y_list, double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("phase_retrieval requires lambda > 0");
  if (a_list.size() != y_list.size() || a_list.empty())
    throw std::invalid_argument("phase_retrieval: a_list and y_list must be equal-length and nonempty");
  const int n = static_cast<int>(a_list.size());
  const int m = static_cast<int>(a_list[0].size());
  ProblemInstance prob;
  prob.name = "phase-retrieval";
  prob.n = n;
  prob.m = m;
  double y_abs_max = 0.0;
  for (int i = 0; i < n; ++i) {
    if (a_list[i].size() != m) throw std::invalid_argument("phase_retrieval: inconsistent dimensions");
    y_abs_max = std::max(y_abs_max, std::abs(y_list[i]));
    prob.oracles.push_back(std::make_shared<PhaseRetrievalOracle>(a_list[i], y_list[i], lambda / n));
  }
  prob.smoothness = estimate_smoothness(prob.oracles, m, 2.0 + std::sqrt(y_abs_max), 64, 23);
  prob.radial_lower_bound = [lambda, n, y_abs_max](double r) {
    return lambda / n * r - y_abs_max * y_abs_max / (4.0 * r);
  };
  return prob;
}

ProblemInstance matrix_sensing(const std::vector<Eigen::MatrixXd>& A_list,
                               const std::vector<double>& y_list, double lambda, int r) {
  if (lambda <= 0.0) throw std::invalid_argument("matrix_sensing requires lambda > 0");
  if (A_list.size() != y_list.size() || A_list.empty())
    throw std::invalid_argument("matrix_sensing: A_list and y_list must be equal-length and nonempty");
  if (r < 1) throw std::invalid_argument("matrix_sensing requires r >= 1");
  const int n = static_cast<int>(A_list.size());
  const int rows = static_cast<int>(A_list[0].rows());
  ProblemInstance prob;
  prob.name = "matrix-sensing";
  prob.n = n;
  prob.m = rows * r;
  double y_abs_max = 0.0;
  for (int i = 0; i < n; ++i) {
    if (A_list[i].rows() != rows || A_list[i].cols() != rows)
      throw std::invalid_argument("matrix_sensing: sensing matrices must be square and same size");
    y_abs_max = std::max(y_abs_max, std::abs(y_list[i]));
    prob.oracles.push_back(std::make_shared<MatrixSensingOracle>(A_list[i], y_list[i], lambda / n, rows, r));
  }
  prob.smoothness = estimate_smoothness(prob.oracles, prob.m, 2.0 + std::sqrt(y_abs_max), 64, 29);
  prob.radial_lower_bound = [lambda, n, y_abs_max](double rr) {
    return lambda / n * rr - y_abs_max * y_abs_max / (4.0 * rr);
  };
  return prob;
}

ProblemInstance gaussian_mixture(const std::vector<Eigen::VectorXd>& z_list, double sigma_tilde,
                                 int q, double lambda) {
  if (sigma_tilde <= 0.0) throw std::invalid_argument("gaussian_mixture requires sigma_tilde > 0");
  if (q < 2) throw std::invalid_argument("gaussian_mixture requires q >= 2");
  if (z_list.empty()) throw std::invalid_argument("gaussian_mixture needs samples");
  const int n = static_cast<int>(z_list.size());
  const int mz = static_cast<int>(z_list[0].size());
  ProblemInstance prob;
  prob.name = "gaussian-mixture";
  prob.n = n;
  prob.m = q * mz;
  double z_max = 0.0;
  for (const auto& z : z_list) {
    if (z.size() != mz) throw std::invalid_argument("gaussian_mixture: inconsistent sample dimensions");
    z_max = std::max(z_max, z.norm());
    prob.oracles.push_back(std::make_shared<GaussianMixtureOracle>(z, sigma_tilde, q, lambda));
  }
  prob.smoothness = estimate_smoothness(prob.oracles, prob.m, 2.0 * z_max + 5.0 * sigma_tilde, 64, 31);
  if (lambda > 0.0) {
    // |w_d u_d| <= sup_x x e^{-x^2/2} / sigma = e^{-1/2}/sigma per component is
    // loose; the bounded-density argument gives a radius-free constant.
    const double C = q * (z_max / (sigma_tilde * sigma_tilde) + 1.0 / sigma_tilde);
    prob.radial_lower_bound = [lambda, C](double r) { return lambda * r - C; };
  }
  return prob;
}

ProblemInstance bilinear_logistic(const std::vector<Eigen::VectorXd>& s_list,
                                  const std::vector<int>& xi_list, double tau, int d, int p) {
  if (tau <= 0.0) throw std::invalid_argument("bilinear_logistic requires tau > 0");
  if (s_list.size() != xi_list.size() || s_list.empty())
    throw std::invalid_argument("bilinear_logistic: s_list and xi_list must be equal-length and nonempty");
  const int n = static_cast<int>(s_list.size());
  ProblemInstance prob;
  prob.name = "bilinear-logistic";
  prob.n = n;
  prob.m = d * p + p;
  for (int i = 0; i < n; ++i) {
    if (s_list[i].size() != d) throw std::invalid_argument("bilinear_logistic: feature dimension mismatch");
    if (xi_list[i] != 0 && xi_list[i] != 1) throw std::invalid_argument("bilinear_logistic: labels must be 0/1");
    const double xi_pm = xi_list[i] == 0 ? -1.0 : 1.0;
    prob.oracles.push_back(std::make_shared<BilinearLogisticOracle>(s_list[i], xi_pm, tau, n, d, p));
  }
  prob.smoothness = estimate_smoothness(prob.oracles, prob.m, 5.0, 64, 37);

  // (Q,w) = 0 is always critical; classify it from the assembled Hessian.
  const Eigen::VectorXd origin = Eigen::VectorXd::Zero(prob.m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(prob.hess_F(origin));
  KnownCritical crit;
  crit.theta = origin;
  crit.lambda_min = es.eigenvalues()(0);
  if (crit.lambda_min < 0.0) {
    crit.kind = CriticalKind::StrictSaddle;
    crit.unstable_dir = es.eigenvectors().col(0);
  } else {
    crit.kind = CriticalKind::LocalMinCandidate;
  }
  prob.known_criticals.push_back(std::move(crit));
  return prob;
}

NeuronVariant neuron_variant_from_string(const std::string& s) {
  if (s == "squared-sigmoid") return NeuronVariant::SquaredSigmoid;
  if (s == "tanh") return NeuronVariant::Tanh;
  if (s == "sigmoid-sq") return NeuronVariant::SigmoidSq;
  if (s == "log-sigmoid-gap") return NeuronVariant::LogSigmoidGap;
  throw std::invalid_argument("unknown neuron loss variant: " + s);
}

ProblemInstance neuron_losses(const std::vector<Eigen::VectorXd>& s_list,
                              const std::vector<double>& xi_list, NeuronVariant variant,
                              double lambda, double mu) {
  if (lambda <= 0.0) throw std::invalid_argument("neuron_losses requires lambda > 0");
  if (variant == NeuronVariant::LogSigmoidGap && mu <= 0.0)
    throw std::invalid_argument("log-sigmoid-gap variant requires mu > 0");
  if (s_list.size() != xi_list.size() || s_list.empty())
    throw std::invalid_argument("neuron_losses: s_list and xi_list must be equal-length and nonempty");
  const int n = static_cast<int>(s_list.size());
  const int m = static_cast<int>(s_list[0].size());
  ProblemInstance prob;
  prob.name = "neuron";
  prob.n = n;
  prob.m = m;
  double data_slope = 0.0;
  for (int i = 0; i < n; ++i) {
    if (s_list[i].size() != m) throw std::invalid_argument("neuron_losses: feature dimension mismatch");
    prob.oracles.push_back(std::make_shared<NeuronOracle>(s_list[i], xi_list[i], variant, lambda, mu, n));
    const double xs = std::abs(xi_list[i]) * s_list[i].norm();
    switch (variant) {
      case NeuronVariant::SquaredSigmoid:
        data_slope = std::max(data_slope, (std::abs(xi_list[i]) + 1.0) * s_list[i].norm() / 4.0);
        break;
      case NeuronVariant::Tanh: data_slope = std::max(data_slope, xs); break;
      case NeuronVariant::SigmoidSq: data_slope = std::max(data_slope, xs / 2.0); break;
      case NeuronVariant::LogSigmoidGap: data_slope = std::max(data_slope, xs); break;
    }
  }
  prob.smoothness = estimate_smoothness(prob.oracles, m, 5.0, 64, 41);
  const double ridge = variant == NeuronVariant::SquaredSigmoid ? 0.5 * lambda / n : lambda;
  const double offset = variant == NeuronVariant::SquaredSigmoid ? data_slope / n : data_slope;
  prob.radial_lower_bound = [ridge, offset](double r) { return ridge * r - offset; };
  return prob;
}

double radial_margin_at(const ProblemInstance& problem, const Eigen::VectorXd& theta) {
  const double nrm = theta.norm();
  if (nrm <= 0.0) throw std::invalid_argument("radial margin undefined at the origin");
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& o : problem.oracles)
    margin = std::min(margin, o->grad(theta).dot(theta) / nrm);
  return margin;
}

AnnulusCertificate annulus_margin(const ProblemInstance& problem, double R, double eps,
                                  int sample_count, std::uint64_t seed) {
  if (!(eps > 0.0 && eps < R)) throw std::invalid_argument("annulus requires 0 < eps < R");
  Rng rng(seed);
  AnnulusCertificate cert;
  cert.R = R;
  cert.eps = eps;
  cert.method = "sampled-infimum";
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < sample_count; ++k) {
    // both shell boundaries are probed exactly; radially monotone margins
    // attain their infimum there
    const double radius = k % 3 == 0 ? R - eps : (k % 3 == 1 ? R : rng.uniform(R - eps, R));
    const Eigen::VectorXd theta = radius * rng.sphere(problem.m);
    worst = std::min(worst, radial_margin_at(problem, theta));
  }
  cert.delta = worst;
  cert.certified = worst > 0.0;
  if (problem.radial_lower_bound) {
    double lb = std::numeric_limits<double>::infinity();
    const int grid = 1024;
    for (int k = 0; k <= grid; ++k)
      lb = std::min(lb, problem.radial_lower_bound(R - eps + eps * k / grid));
    cert.closed_form_bound = lb;
  }
  return cert;
}

CriticalClassification classify_critical(const ProblemInstance& problem,
                                         const Eigen::VectorXd& theta, double delta_tol,
                                         double stat_tol) {
  const double gn = problem.grad_F(theta).norm();
  if (gn > stat_tol)
    throw std::invalid_argument("classify_critical: point is not stationary (|grad F| = " +
                                std::to_string(gn) + ")");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(problem.hess_F(theta));
  CriticalClassification out;
  out.lambda_min = es.eigenvalues()(0);
  out.unstable_dir = es.eigenvectors().col(0);
  out.kind = out.lambda_min < -delta_tol ? CriticalKind::StrictSaddle : CriticalKind::LocalMinCandidate;
  return out;
}

SmoothnessData estimate_smoothness(const std::vector<std::shared_ptr<const LocalOracle>>& oracles,
                                   int m, double radius, int samples, std::uint64_t seed) {
  Rng rng(seed);
  const int n = static_cast<int>(oracles.size());
  SmoothnessData sd;
  sd.L_i.resize(n);
  sd.L_hess_i.resize(n);
  sd.estimated = true;
  sd.estimate_radius = radius;
  std::vector<Eigen::VectorXd> pts;
  pts.reserve(samples);
  for (int k = 0; k < samples; ++k) {
    const double r = radius * std::pow(rng.uniform(), 1.0 / m);
    pts.push_back(r * rng.sphere(m));
  }
  for (int i = 0; i < n; ++i) {
    double L = 0.0, Lh = 0.0;
    std::vector<Eigen::MatrixXd> hs;
    hs.reserve(samples);
    for (const auto& p : pts) {
      hs.push_back(oracles[i]->hess(p));
      L = std::max(L, sym_opnorm(hs.back()));
    }
    for (std::size_t a = 1; a < pts.size(); ++a) {
      const double dist = (pts[a] - pts[a - 1]).norm();
      if (dist > 1e-9) Lh = std::max(Lh, sym_opnorm(hs[a] - hs[a - 1]) / dist);
    }
    sd.L_i(i) = 1.5 * L;
    sd.L_hess_i(i) = 1.5 * Lh;
  }
  sd.finalize();
  return sd;
}

}  // namespace netopt
