#include "netopt/saddle.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "netopt/problems.hpp"
#include "netopt/rng.hpp"

namespace netopt {

namespace {

Eigen::MatrixXd kron_with_identity(const Eigen::MatrixXd& A, int m) {
  const int n = static_cast<int>(A.rows()), c = static_cast<int>(A.cols());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n) * m,
                                            static_cast<Eigen::Index>(c) * m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < c; ++j)
      if (A(i, j) != 0.0)
        K.block(static_cast<Eigen::Index>(i) * m, static_cast<Eigen::Index>(j) * m, m, m) =
            A(i, j) * Eigen::MatrixXd::Identity(m, m);
  return K;
}

// g(u) in (x, h) coordinates
std::pair<Eigen::VectorXd, Eigen::VectorXd> apply_g(const Eigen::VectorXd& x,
                                                    const Eigen::VectorXd& h,
                                                    const MixingMatrix& R, const MixingMatrix& C,
                                                    double alpha, const ProblemInstance& problem) {
  const Eigen::VectorXd g = problem.grad_F_c(x);
  Eigen::VectorXd x_next = apply_mixing(R.W, x, problem.m) - alpha * (h + g);
  Eigen::VectorXd h_next = apply_mixing(C.W, h, problem.m) + apply_mixing(C.W, g, problem.m) - g;
  return {std::move(x_next), std::move(h_next)};
}

}  // namespace

ConsensualSaddle embed_consensual_saddle(const ProblemInstance& problem,
                                         const Eigen::VectorXd& theta_star, const MixingMatrix& R,
                                         const MixingMatrix& C, double alpha, double delta_tol,
                                         double stat_tol) {
  const CriticalClassification cls = classify_critical(problem, theta_star, delta_tol, stat_tol);
  if (cls.kind != CriticalKind::StrictSaddle)
    throw std::invalid_argument("embed_consensual_saddle: point is not a strict saddle");

  const int n = problem.n, m = problem.m;
  ConsensualSaddle s;
  s.theta_star = theta_star;
  s.lambda_min = cls.lambda_min;
  s.unstable_dir = cls.unstable_dir;

  Eigen::VectorXd x_star(static_cast<Eigen::Index>(n) * m);
  for (int i = 0; i < n; ++i) x_star.segment(static_cast<Eigen::Index>(i) * m, m) = theta_star;
  const Eigen::VectorXd h_star = -problem.grad_F_c(x_star);
  s.u_star.resize(2 * static_cast<Eigen::Index>(n) * m);
  s.u_star.head(static_cast<Eigen::Index>(n) * m) = x_star;
  s.u_star.tail(static_cast<Eigen::Index>(n) * m) = h_star;

  const auto [x1, h1] = apply_g(x_star, h_star, R, C, alpha, problem);
  s.fixed_point_residual = std::sqrt((x1 - x_star).squaredNorm() + (h1 - h_star).squaredNorm());
  return s;
}

Eigen::MatrixXd basis_span(const MixingMatrix& C, int m) {
  const int n = C.n();
  if (n == 1) return Eigen::MatrixXd(m, 0);
  const Eigen::MatrixXd diff = C.W - Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const double tol = 1e-10 * sv(0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > tol) ++rank;
  if (rank != n - 1)
    throw std::runtime_error("basis_span: rank(C - I) = " + std::to_string(rank) +
                             ", expected n-1 = " + std::to_string(n - 1) +
                             " (degenerate graph)");
  const Eigen::MatrixXd Un = svd.matrixU().leftCols(n - 1);
  return kron_with_identity(Un, m);
}

JacobianBundle assemble_Dg(const Eigen::VectorXd& x, const MixingMatrix& R, const MixingMatrix& C,
                           double alpha, const ProblemInstance& problem) {
  const int n = problem.n, m = problem.m;
  const Eigen::Index nm = static_cast<Eigen::Index>(n) * m;
  const Eigen::MatrixXd H = problem.hess_F_c(x);
  const Eigen::MatrixXd WR = kron_with_identity(R.W, m);
  const Eigen::MatrixXd WC = kron_with_identity(C.W, m);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nm, nm);

  JacobianBundle jb;
  jb.Dg_tilde.resize(2 * nm, 2 * nm);
  jb.Dg_tilde.topLeftCorner(nm, nm) = WR - alpha * H;
  jb.Dg_tilde.topRightCorner(nm, nm) = -alpha * I;
  jb.Dg_tilde.bottomLeftCorner(nm, nm) = (WC - I) * H;
  jb.Dg_tilde.bottomRightCorner(nm, nm) = WC;

  jb.U_h = basis_span(C, m);
  const Eigen::Index k = jb.U_h.cols();
  jb.projected.resize(nm + k, nm + k);
  jb.projected.topLeftCorner(nm, nm) = WR - alpha * H;
  jb.projected.topRightCorner(nm, k) = -alpha * jb.U_h;
  jb.projected.bottomLeftCorner(k, nm) = jb.U_h.transpose() * (WC - I) * H;
  jb.projected.bottomRightCorner(k, k) = jb.U_h.transpose() * WC * jb.U_h;

  Eigen::EigenSolver<Eigen::MatrixXd> es(jb.projected, /*computeEigenvectors=*/false);
  jb.spectrum = es.eigenvalues();
  return jb;
}

DiffeoCertificate check_diffeomorphism(const MixingMatrix& R, const MixingMatrix& C, double alpha,
                                       const ProblemInstance& problem, int probe_count,
                                       std::uint64_t seed, double probe_scale) {
  const int n = problem.n, m = problem.m;
  const double detR = R.W.determinant();
  const double detC = C.W.determinant();
  if (std::abs(detR) < 1e-12 || std::abs(detC) < 1e-12)
    throw std::invalid_argument("check_diffeomorphism requires nonsingular R and C");

  DiffeoCertificate cert;
  cert.alpha = alpha;
  cert.alpha_bound = sigma_min_of(C.W * R.W) / problem.smoothness.L_c;
  cert.admissible = alpha > 0.0 && alpha < cert.alpha_bound;
  if (!cert.admissible) {
    cert.passed = false;
    return cert;
  }

  Rng rng(seed);
  const Eigen::MatrixXd WCinv = kron_with_identity(C.W, m).inverse();
  const Eigen::MatrixXd WR = kron_with_identity(R.W, m);
  cert.min_sigma_projected = std::numeric_limits<double>::infinity();
  cert.min_sigma_schur = std::numeric_limits<double>::infinity();
  for (int k = 0; k < probe_count; ++k) {
    const Eigen::VectorXd x = rng.normal_vector(static_cast<Eigen::Index>(n) * m, probe_scale);
    const JacobianBundle jb = assemble_Dg(x, R, C, alpha, problem);
    cert.min_sigma_projected = std::min(cert.min_sigma_projected, sigma_min_of(jb.projected));
    const Eigen::MatrixXd S = WR - alpha * WCinv * problem.hess_F_c(x);
    cert.min_sigma_schur = std::min(cert.min_sigma_schur, sigma_min_of(S));
  }
  cert.passed = cert.min_sigma_projected > 1e-10 && cert.min_sigma_schur > 1e-10;
  return cert;
}

InstabilityCertificate instability_certificate(const ConsensualSaddle& saddle,
                                               const MixingMatrix& R, const MixingMatrix& C,
                                               double alpha, const ProblemInstance& problem) {
  const int n = problem.n, m = problem.m;
  const Eigen::Index nm = static_cast<Eigen::Index>(n) * m;
  InstabilityCertificate cert;
  cert.fixed_point_residual = saddle.fixed_point_residual;

  const bool symmetric =
      R.W.isApprox(R.W.transpose(), 1e-12) && C.W.isApprox(C.W.transpose(), 1e-12);
  if (symmetric)
    cert.conditions_used = "symmetric-weights";
  else if (m == 1)
    cert.conditions_used = "scalar";
  else
    cert.conditions_used = "conditional";

  const Eigen::VectorXd x_star = saddle.u_star.head(nm);
  const JacobianBundle jb = assemble_Dg(x_star, R, C, alpha, problem);
  cert.spradii = jb.spectrum.cwiseAbs().maxCoeff();
  cert.unstable = cert.spradii > 1.0 + 1e-9;

  // witness from the full differential; its eigenvector must lie in S
  Eigen::EigenSolver<Eigen::MatrixXd> es(jb.Dg_tilde);
  int best = -1;
  double best_mag = 1.0 + 1e-9;
  for (int i = 0; i < es.eigenvalues().size(); ++i) {
    const double mag = std::abs(es.eigenvalues()(i));
    if (mag > best_mag) {
      best_mag = mag;
      best = i;
    }
  }
  if (best >= 0) {
    cert.witness_eigenvalue = es.eigenvalues()(best);
    Eigen::VectorXd v = es.eigenvectors().col(best).real();
    if (v.norm() < 1e-12) v = es.eigenvectors().col(best).imag();
    v.normalize();
    cert.witness_eigenvector = v;
    // P_S = blkdiag(I, U_h U_h^T)
    Eigen::VectorXd pv(2 * nm);
    pv.head(nm) = v.head(nm);
    pv.tail(nm) = jb.U_h * (jb.U_h.transpose() * v.tail(nm));
    cert.witness_span_residual = (v - pv).norm();
  }
  return cert;
}

QScanReport q_scan(const ConsensualSaddle& saddle, const MixingMatrix& R, const MixingMatrix& C,
                   double alpha, const ProblemInstance& problem,
                   const std::vector<double>& lambda_grid, double bisect_tol) {
  const int n = problem.n, m = problem.m;
  const Eigen::Index nm = static_cast<Eigen::Index>(n) * m;
  const Eigen::MatrixXd H = problem.hess_F_c(saddle.u_star.head(nm));
  const Eigen::MatrixXd WR = kron_with_identity(R.W, m);
  const Eigen::MatrixXd WC = kron_with_identity(C.W, m);
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nm, nm);

  const auto T_of = [&](double lam) -> Eigen::MatrixXd {
    return (WC - lam * I) * (WR - lam * I) + alpha * (lam - 1.0) * H;
  };
  const auto signed_logdet = [&](double lam) {
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(T_of(lam));
    const Eigen::MatrixXd& LU = lu.matrixLU();
    double slog = 0.0;
    double sign = lu.permutationP().determinant();  // +/-1
    for (Eigen::Index i = 0; i < LU.rows(); ++i) {
      const double piv = LU(i, i);
      if (piv < 0.0) sign = -sign;
      if (piv == 0.0) sign = 0.0;
      slog += std::log(std::abs(piv) + 1e-300);
    }
    return std::pair<double, double>(sign, slog);
  };

  QScanReport rep;
  {
    const Eigen::MatrixXd T1 = T_of(1.0);
    rep.q_at_one = T1.determinant();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(T1);
    const auto& sv = svd.singularValues();
    rep.q_one_scale = sv(0) > 0.0 ? sv(sv.size() - 1) / sv(0) : 0.0;
  }

  double prev_lam = 0.0, prev_sign = 0.0;
  bool have_prev = false;
  for (double lam : lambda_grid) {
    const auto [sign, slog] = signed_logdet(lam);
    rep.samples.emplace_back(lam, sign * slog);
    if (lam > 1.0) {
      if (have_prev && prev_sign != 0.0 && sign != 0.0 && sign != prev_sign) {
        rep.sign_change_found = true;
        rep.bracket_lo = prev_lam;
        rep.bracket_hi = lam;
        break;
      }
      have_prev = true;
      prev_lam = lam;
      prev_sign = sign;
    }
  }
  if (rep.sign_change_found) {
    double lo = rep.bracket_lo, hi = rep.bracket_hi;
    const double sign_lo = signed_logdet(lo).first;
    while (hi - lo > bisect_tol) {
      const double mid = 0.5 * (lo + hi);
      if (signed_logdet(mid).first == sign_lo)
        lo = mid;
      else
        hi = mid;
    }
    rep.root = 0.5 * (lo + hi);
  }
  return rep;
}

DgdSaddleLinkReport dgd_saddle_link(const Eigen::VectorXd& x_limit, const ProblemInstance& problem,
                                    const MixingMatrix& D, double alpha) {
  const int n = problem.n, m = problem.m;
  DgdSaddleLinkReport rep;
  const KnownCritical* saddle = problem.known_saddle();
  if (!saddle) return rep;  // no registered saddle: inconclusive

  const Eigen::VectorXd xbar = block_mean(x_limit, n, m);
  rep.dist_to_crit = (xbar - saddle->theta).norm();
  rep.cons_err = consensus_error(x_limit, n, m);
  const double delta = -saddle->lambda_min;
  rep.cond_i_bound = problem.smoothness.L_hess > 0.0
                         ? delta / (2.0 * problem.smoothness.L_hess)
                         : std::numeric_limits<double>::infinity();
  rep.cond_ii_bound = problem.smoothness.L_hess_c > 0.0
                          ? delta / (2.0 * n * problem.smoothness.L_hess_c)
                          : std::numeric_limits<double>::infinity();
  rep.conditions_met =
      delta > 0.0 && rep.dist_to_crit < rep.cond_i_bound && rep.cons_err < rep.cond_ii_bound;
  if (!rep.conditions_met) return rep;

  // hess L_alpha = hess F_c + (I - W_D)/alpha
  const Eigen::Index nm = static_cast<Eigen::Index>(n) * m;
  const Eigen::MatrixXd WD = kron_with_identity(D.W, m);
  const Eigen::MatrixXd HL =
      problem.hess_F_c(x_limit) + (Eigen::MatrixXd::Identity(nm, nm) - WD) / alpha;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (HL + HL.transpose()),
                                                    Eigen::EigenvaluesOnly);
  rep.lambda_min_L_alpha = es.eigenvalues()(0);

  // test vector 1 (x) u kills the consensus-penalty curvature
  Eigen::VectorXd tv(nm);
  for (int i = 0; i < n; ++i) tv.segment(static_cast<Eigen::Index>(i) * m, m) = saddle->unstable_dir;
  tv /= tv.norm();
  rep.test_vector_value = tv.dot(HL * tv);
  rep.strict_saddle_of_L_alpha = rep.lambda_min_L_alpha < 0.0;
  return rep;
}

double t_bound(const ProblemInstance& problem, const MixingMatrix& R_tilde,
               const MixingMatrix& C_tilde, double alpha, double delta) {
  const int n = problem.n, m = problem.m;
  const Eigen::Index nm = static_cast<Eigen::Index>(n) * m;
  const double d_tilde = 2.0 * m * n;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nm, nm);

  double C_Q = 0.0, C_P = 0.0;
  for (const auto& crit : problem.known_criticals) {
    if (crit.kind != CriticalKind::StrictSaddle) continue;
    Eigen::VectorXd x_star(nm);
    for (int i = 0; i < n; ++i) x_star.segment(static_cast<Eigen::Index>(i) * m, m) = crit.theta;
    const Eigen::MatrixXd H = problem.hess_F_c(x_star);
    Eigen::MatrixXd Q(2 * nm, 2 * nm);
    Q.setZero();
    Q.topLeftCorner(nm, nm) = I - alpha * H;
    Q.topRightCorner(nm, nm) = -alpha * I;
    Q.bottomRightCorner(nm, nm) = I;
    Eigen::MatrixXd P(2 * nm, 2 * nm);  // t * P_t
    P.setZero();
    P.topLeftCorner(nm, nm) = kron_with_identity(R_tilde.W, m) - I;
    P.bottomLeftCorner(nm, nm) = (kron_with_identity(C_tilde.W, m) - I) * H;
    P.bottomRightCorner(nm, nm) = kron_with_identity(C_tilde.W, m) - I;
    Eigen::JacobiSVD<Eigen::MatrixXd> svdQ(Q);
    Eigen::JacobiSVD<Eigen::MatrixXd> svdP(P);
    C_Q = std::max(C_Q, svdQ.singularValues()(0));
    C_P = std::max(C_P, svdP.singularValues()(0));
  }
  if (C_Q == 0.0 && C_P == 0.0)
    throw std::invalid_argument("t_bound needs a problem with a registered strict saddle");
  return std::pow(C_P + 2.0 * C_Q, d_tilde - 1.0) * C_P / std::pow(alpha * delta / d_tilde, d_tilde);
}

EscapeReport escape_statistics(const ProblemInstance& problem, EscapeAlgo algo,
                               const ConsensualSaddle& saddle, const MixingMatrix& R,
                               const MixingMatrix& C, const EscapeConfig& config, int num_seeds,
                               std::uint64_t base_seed) {
  const int n = problem.n, m = problem.m;
  EscapeReport report;
  const Eigen::VectorXd& u_dir = saddle.unstable_dir;

  for (int s = 0; s < num_seeds; ++s) {
    Rng rng(base_seed + s);
    Eigen::VectorXd x0(static_cast<Eigen::Index>(n) * m);
    for (int i = 0; i < n; ++i)
      x0.segment(static_cast<Eigen::Index>(i) * m, m) =
          saddle.theta_star + rng.normal_vector(m, config.init_std);

    EscapeSeedResult res;
    res.seed = base_seed + s;
    const Eigen::VectorXd xbar0 = block_mean(x0, n, m);
    res.proj_initial = std::abs(u_dir.dot(xbar0 - saddle.theta_star));
    res.dist_initial = (xbar0 - saddle.theta_star).norm();

    Eigen::VectorXd x_final;
    if (algo == EscapeAlgo::Dgd) {
      DgdRunOptions opts;
      opts.max_iters = config.iters;
      opts.record_stride = config.iters;  // endpoints only
      const DgdTrace tr = run_dgd(problem, R, config.alpha, x0, opts);
      x_final = tr.final_state.x;
    } else {
      DogtRunOptions opts;
      opts.max_iters = config.iters;
      opts.record_stride = config.iters;
      opts.force = true;
      // the paper's randomized-consensus y-init with unit-std draws
      const DogtTrace tr = run_dogt(problem, R, C, config.alpha, x0,
                                    YInitMode::RandomizedConsensus, opts, rng.next_u64());
      x_final = tr.final_state.x;
    }

    const Eigen::VectorXd xbar = block_mean(x_final, n, m);
    res.proj_final = std::abs(u_dir.dot(xbar - saddle.theta_star));
    res.dist_final = (xbar - saddle.theta_star).norm();
    res.escaped_proj = res.proj_final > config.escape_factor * res.proj_initial;
    res.escaped_dist = res.dist_final > config.escape_factor * res.dist_initial;
    res.final_grad_norm = problem.grad_F(xbar).norm();

    double dist_sos = std::numeric_limits<double>::quiet_NaN();
    for (const auto& crit : problem.known_criticals)
      if (crit.kind == CriticalKind::LocalMinCandidate) {
        const double d = (xbar - crit.theta).norm();
        if (std::isnan(dist_sos) || d < dist_sos) dist_sos = d;
      }
    if (!std::isnan(dist_sos))
      res.merit_M = std::max(dist_sos, consensus_error(x_final, n, m));
    report.seeds.push_back(res);
  }
  int count = 0;
  for (const auto& r : report.seeds)
    if (r.escaped_proj && r.escaped_dist) ++count;
  report.frequency = report.seeds.empty() ? 0.0 : static_cast<double>(count) / report.seeds.size();
  return report;
}

}  // namespace netopt
