#include "netopt/dogt.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "netopt/dgd.hpp"
#include "netopt/rng.hpp"

namespace netopt {

namespace {

Eigen::VectorXd weighted_block_mean(const Eigen::VectorXd& x, const Eigen::VectorXd& r, int m) {
  const int n = static_cast<int>(r.size());
  Eigen::Map<const Eigen::MatrixXd> X(x.data(), m, n);
  return X * r;
}

Eigen::VectorXd block_sum(const Eigen::VectorXd& x, int n, int m) {
  Eigen::Map<const Eigen::MatrixXd> X(x.data(), m, n);
  return X.rowwise().sum();
}

// x - 1 (x) (r^T x), the consensus deviation w.r.t. the r-weighted mean
Eigen::VectorXd deviation_R(const Eigen::VectorXd& x, const Eigen::VectorXd& r, int m) {
  const Eigen::VectorXd xbar = weighted_block_mean(x, r, m);
  Eigen::VectorXd out(x.size());
  const int n = static_cast<int>(r.size());
  for (int i = 0; i < n; ++i) out.segment(static_cast<Eigen::Index>(i) * m, m) = x.segment(static_cast<Eigen::Index>(i) * m, m) - xbar;
  return out;
}

// y - c (x) (1^T y)
Eigen::VectorXd deviation_C(const Eigen::VectorXd& y, const Eigen::VectorXd& c, int m) {
  const Eigen::VectorXd ybar = block_sum(y, static_cast<int>(c.size()), m);
  Eigen::VectorXd out(y.size());
  const int n = static_cast<int>(c.size());
  for (int i = 0; i < n; ++i)
    out.segment(static_cast<Eigen::Index>(i) * m, m) = y.segment(static_cast<Eigen::Index>(i) * m, m) - c(i) * ybar;
  return out;
}

}  // namespace

Eigen::VectorXd init_y(const Eigen::VectorXd& x0, const MixingMatrix& C,
                       const ProblemInstance& problem, YInitMode mode, std::uint64_t seed) {
  if (!C.has_right()) throw std::invalid_argument("init_y requires a column-stochastic C");
  Eigen::VectorXd y = problem.grad_F_c(x0);
  if (mode == YInitMode::RandomizedConsensus) {
    Rng rng(seed);
    const Eigen::VectorXd y_pre = rng.normal_vector(y.size());
    y += apply_mixing(C.W, y_pre, problem.m) - y_pre;
  }
  return y;
}

DogtState dogt_step(const DogtState& state, const MixingMatrix& R, const MixingMatrix& C,
                    double alpha, const ProblemInstance& problem) {
  if (alpha <= 0.0) throw std::invalid_argument("dogt_step requires alpha > 0");
  DogtState out;
  out.x = apply_mixing(R.W, state.x, problem.m) - alpha * state.y;
  if (!out.x.allFinite())
    throw std::runtime_error("dogt_step: non-finite x at iteration " + std::to_string(state.iter));
  const Eigen::VectorXd g_new = problem.grad_F_c(out.x);
  const Eigen::VectorXd g_old = problem.grad_F_c(state.x);
  if (!g_new.allFinite() || !g_old.allFinite())
    throw std::runtime_error("dogt_step: non-finite gradient at iteration " + std::to_string(state.iter));
  out.y = apply_mixing(C.W, state.y, problem.m) + g_new - g_old;
  out.iter = state.iter + 1;
  return out;
}

WeightedMeans weighted_means(const DogtState& state, const Eigen::VectorXd& r,
                             const ProblemInstance& problem) {
  WeightedMeans wm;
  wm.x_bar = weighted_block_mean(state.x, r, problem.m);
  wm.y_bar = block_sum(state.y, problem.n, problem.m);
  wm.g_bar = problem.sum_local_grads(state.x);
  wm.tracking_residual = (wm.y_bar - wm.g_bar).norm();
  return wm;
}

LyapunovParams default_params(const SpectralConstants& spec, double L_c, double L, int n,
                              double alpha, bool throw_on_infeasible) {
  if (spec.rho_R >= 1.0 || spec.rho_C >= 1.0)
    throw std::invalid_argument("default_params requires rho_R < 1 and rho_C < 1");
  if (L_c <= 0.0) throw std::invalid_argument("default_params requires L_c > 0");

  LyapunovParams p;
  p.alpha = alpha;
  constexpr double kRhoFloor = 1e-8;
  constexpr double kEpsCap = 1e3;
  const double rR2 = spec.rho_R * spec.rho_R;
  const double rC2 = spec.rho_C * spec.rho_C;
  p.eps_x = spec.rho_R < kRhoFloor ? kEpsCap : (1.0 - rR2) / (4.0 * rR2);
  p.eps_x = std::min(p.eps_x, kEpsCap);
  p.eps_y = spec.rho_C < kRhoFloor ? kEpsCap : (1.0 - rC2) / (2.0 * rC2);
  p.eps_y = std::min(p.eps_y, kEpsCap);
  p.eps = spec.zeta / (1.0 + spec.zeta);  // xi = zeta, the only symbol fitting 0 < eps < 2 zeta/(1+zeta)
  p.varkappa = spec.c_min * spec.r_min * (1.0 - rR2) * (1.0 - rC2) / (24.0 * L_c * L_c);

  const double K_2R2 = spec.K_2R * spec.K_2R;
  const double K_2C2 = spec.K_2C * spec.K_2C;
  const double K_C22 = spec.K_C2 * spec.K_C2;
  p.K2 = 2.0 * spec.K_RC * spec.K_RC * (1.0 + 1.0 / p.eps_x);
  p.K3 = 2.0 * n * (1.0 + 1.0 / p.eps_x);
  p.K4 = 3.0 * K_C22 * K_2C2 * L_c * L_c;
  p.K5 = 3.0 * K_C22 * L_c * L_c;
  p.K6 = 3.0 * K_C22 * K_2R2 * L_c * L_c;

  p.rho_tilde_R = rR2 * (1.0 + p.eps_x) +
                  0.5 * alpha * n * L_c * L_c * K_2R2 * (1.0 + spec.zeta / p.eps) +
                  p.varkappa * p.K6 * (1.0 + 1.0 / p.eps_y);
  p.rho_tilde_C = rC2 * (1.0 + p.eps_y) + 0.5 * alpha * K_2C2 * (1.0 + 1.0 / p.eps) / p.varkappa +
                  alpha * alpha * ((L * K_2C2 + p.K2) / p.varkappa + p.K4 * (1.0 + 1.0 / p.eps_y));
  p.Gamma = (spec.zeta - 0.5 * p.eps * spec.zeta - 0.5 * p.eps) * alpha -
            (L * spec.zeta * spec.zeta + p.K3 + p.K5 * p.varkappa) * alpha * alpha;

  const AlphaBounds ab = alpha_bound(spec, L_c, L, n);
  p.alpha_tilde_1 = ab.tilde1;
  p.alpha_tilde_2 = ab.tilde2;
  p.alpha_tilde_3 = ab.tilde3;
  p.alpha_final_bound = ab.final_bound;

  p.feasible = p.rho_tilde_R < 1.0 && p.rho_tilde_C < 1.0 && p.Gamma > 0.0;
  if (!p.feasible) {
    if (p.rho_tilde_R >= 1.0)
      p.infeasibility = "rho_tilde_R >= 1: alpha violates the consensus-contraction step bound";
    else if (p.rho_tilde_C >= 1.0)
      p.infeasibility = "rho_tilde_C >= 1: alpha violates the tracking-contraction step bound";
    else
      p.infeasibility = "Gamma <= 0: alpha violates the mean-gradient descent step bound";
    if (throw_on_infeasible) throw std::invalid_argument("default_params: " + p.infeasibility);
    return p;
  }

  const double m1 = std::pow(2.0 * spec.r_max + L_c * std::sqrt(static_cast<double>(n)), 2) /
                    (spec.r_min * (1.0 - p.rho_tilde_R));
  const double m2 =
      2.0 * p.varkappa * spec.c_max / (spec.c_min * spec.c_min * (1.0 - p.rho_tilde_C));
  p.M = std::sqrt(2.0) * std::sqrt(std::max(m1, std::max(m2, 1.0 / p.Gamma)));

  const double K_nrm = std::max(spec.K_2R, spec.K_2C);
  const double k1 = 4.0 * n * K_nrm * K_nrm / (1.0 - p.rho_tilde_R);
  const double k2 = K_nrm * K_nrm / (p.varkappa * (1.0 - p.rho_tilde_C)) *
                    std::pow(alpha + 2.0 * std::sqrt(static_cast<double>(n)) / (1.0 + L_c), 2);
  const double k3 = alpha * alpha / p.Gamma;
  p.K_len = std::sqrt(3.0) * (1.0 + L_c) * std::sqrt(std::max(k1, std::max(k2, k3)));
  return p;
}

AlphaBounds alpha_bound(const SpectralConstants& spec, double L_c, double L, int n) {
  AlphaBounds b;
  const double one_mR = 1.0 - spec.rho_R * spec.rho_R;
  const double one_mC = 1.0 - spec.rho_C * spec.rho_C;
  b.tilde1 = spec.r_min * one_mR / (3.0 * n * L_c * L_c);
  b.tilde2 = one_mR * one_mR * one_mC * one_mC * spec.r_min * spec.r_min * spec.c_min * spec.c_min /
             (1152.0 * L_c * L_c * (2.0 + L));
  b.tilde3 = spec.r_min * spec.c_min * one_mR / (2.0 * (L + 16.0 * n));
  b.final_bound = one_mR * one_mR * one_mC * one_mC * spec.r_min * spec.r_min * spec.c_min *
                  spec.c_min / (1152.0 * L_c * L_c * (L + 16.0 * n));
  return b;
}

double lyapunov_L(const DogtState& state, const LyapunovParams& params, const Eigen::VectorXd& r,
                  const Eigen::VectorXd& c, const ProblemInstance& problem) {
  const Eigen::VectorXd xbar = weighted_block_mean(state.x, r, problem.m);
  const Eigen::VectorXd dx = deviation_R(state.x, r, problem.m);
  const Eigen::VectorXd dy = deviation_C(state.y, c, problem.m);
  const double nx = weighted_norm_R(dx, r, problem.m);
  const double ny = weighted_norm_C(dy, c, problem.m);
  return problem.F(xbar) + nx * nx + params.varkappa * ny * ny;
}

double merit_d(const DogtState& state, const LyapunovParams& params, const Eigen::VectorXd& r,
               const Eigen::VectorXd& c, const ProblemInstance& problem) {
  const Eigen::VectorXd dx = deviation_R(state.x, r, problem.m);
  const Eigen::VectorXd dy = deviation_C(state.y, c, problem.m);
  const double nx = weighted_norm_R(dx, r, problem.m);
  const double ny = weighted_norm_C(dy, c, problem.m);
  const double gsum = problem.sum_local_grads(state.x).squaredNorm();
  return std::sqrt((1.0 - params.rho_tilde_R) * nx * nx +
                   params.varkappa * (1.0 - params.rho_tilde_C) * ny * ny + params.Gamma * gsum);
}

Eigen::VectorXd grad_L(const DogtState& state, const LyapunovParams& params,
                       const Eigen::VectorXd& r, const Eigen::VectorXd& c,
                       const ProblemInstance& problem) {
  const int n = problem.n, m = problem.m;
  const Eigen::VectorXd xbar = weighted_block_mean(state.x, r, m);
  const Eigen::VectorXd gbar = problem.grad_F(xbar);  // grad F_c(J_R x) summed
  const Eigen::VectorXd dx = deviation_R(state.x, r, m);
  const Eigen::VectorXd dy = deviation_C(state.y, c, m);

  Eigen::VectorXd g(2 * static_cast<Eigen::Index>(n) * m);
  // grad_x = J_R^T grad F_c(J_R x) + 2 (I-J_R)^T D_r (I-J_R) x
  Eigen::VectorXd rdx(static_cast<Eigen::Index>(n) * m);
  for (int i = 0; i < n; ++i) rdx.segment(static_cast<Eigen::Index>(i) * m, m) = r(i) * dx.segment(static_cast<Eigen::Index>(i) * m, m);
  const Eigen::VectorXd rdx_sum = block_sum(rdx, n, m);  // r^T-weighted column sum
  for (int i = 0; i < n; ++i) {
    g.segment(static_cast<Eigen::Index>(i) * m, m) =
        r(i) * gbar + 2.0 * (rdx.segment(static_cast<Eigen::Index>(i) * m, m) - r(i) * rdx_sum);
  }
  // grad_y = 2 kappa (I-J_C)^T D_c^{-1} (I-J_C) y; J_C^T = 1 c^T, so the
  // correction is sum_j c_j (dy_j / c_j) = sum_j dy_j, identical per block.
  Eigen::VectorXd cdy(static_cast<Eigen::Index>(n) * m);
  for (int i = 0; i < n; ++i) cdy.segment(static_cast<Eigen::Index>(i) * m, m) = dy.segment(static_cast<Eigen::Index>(i) * m, m) / c(i);
  const Eigen::VectorXd dy_sum = block_sum(dy, n, m);
  for (int i = 0; i < n; ++i) {
    g.segment(static_cast<Eigen::Index>(n + i) * m, m) =
        2.0 * params.varkappa * (cdy.segment(static_cast<Eigen::Index>(i) * m, m) - dy_sum);
  }
  return g;
}

DogtTrace run_dogt(const ProblemInstance& problem, const MixingMatrix& R, const MixingMatrix& C,
                   double alpha, const Eigen::VectorXd& x0, YInitMode y_mode,
                   const DogtRunOptions& opts, std::uint64_t y_seed,
                   const std::function<void(const DogtState&, const DogtRecord&)>& observer) {
  if (x0.size() != static_cast<Eigen::Index>(problem.n) * problem.m)
    throw std::invalid_argument("run_dogt: x0 has the wrong stacked dimension");
  if (!R.has_left() || !C.has_right())
    throw std::invalid_argument("run_dogt needs R with a left Perron vector and C with a right one");

  const SpectralConstants spec = contraction_factors(R, C);
  const AlphaBounds ab = alpha_bound(spec, problem.smoothness.L_c, problem.smoothness.L, problem.n);
  DogtTrace trace;
  if (alpha > ab.practical()) {
    if (!opts.force)
      throw std::invalid_argument(
          "run_dogt: alpha exceeds the practical step bound (" + std::to_string(ab.practical()) +
          "); pass force to override");
    // instrument with constants from an admissible step so L and d stay meaningful
    trace.params = default_params(spec, problem.smoothness.L_c, problem.smoothness.L, problem.n,
                                  0.99 * ab.practical());
    trace.params_at_forced_alpha = false;
  } else {
    trace.params =
        default_params(spec, problem.smoothness.L_c, problem.smoothness.L, problem.n, alpha);
    trace.params_at_forced_alpha = true;
  }

  DogtState state;
  state.x = x0;
  state.y = init_y(x0, C, problem, y_mode, y_seed);
  state.iter = 0;

  trace.t_eps.assign(opts.t_eps_thresholds.size(), -1);

  for (long nu = 0; nu <= opts.max_iters; ++nu) {
    if (!state.x.allFinite() || !state.y.allFinite()) {
      trace.diverged = true;
      trace.diverged_at = nu;
      break;
    }
    const double d = merit_d(state, trace.params, R.perron_left, C.perron_right, problem);
    trace.sum_d_sq += d * d;
    for (std::size_t k = 0; k < trace.t_eps.size(); ++k)
      if (trace.t_eps[k] < 0 && d <= opts.t_eps_thresholds[k]) trace.t_eps[k] = nu;

    const bool stop = (opts.merit_tol > 0.0 && d <= opts.merit_tol) || nu == opts.max_iters;
    if (nu % opts.record_stride == 0 || stop) {
      DogtRecord rec;
      rec.iter = state.iter;
      rec.L = lyapunov_L(state, trace.params, R.perron_left, C.perron_right, problem);
      rec.d = d;
      const WeightedMeans wm = weighted_means(state, R.perron_left, problem);
      rec.x_bar = wm.x_bar;
      rec.y_bar_norm = wm.y_bar.norm();
      rec.track_residual = wm.tracking_residual;
      Eigen::VectorXd dev(state.x.size());
      for (int i = 0; i < problem.n; ++i)
        dev.segment(static_cast<Eigen::Index>(i) * problem.m, problem.m) =
            state.x.segment(static_cast<Eigen::Index>(i) * problem.m, problem.m) - wm.x_bar;
      rec.cons_err = dev.norm();
      rec.grad_F_mean_norm = problem.grad_F(wm.x_bar).norm();
      trace.records.push_back(rec);
      if (observer) observer(state, rec);
    }
    if (stop) break;

    try {
      state = dogt_step(state, R, C, alpha, problem);
    } catch (const std::runtime_error&) {
      trace.diverged = true;
      trace.diverged_at = nu + 1;
      break;
    }
  }
  trace.final_state = state;
  return trace;
}

RateClassification rate_classify(const std::vector<double>& dist_tail) {
  RateClassification rc;
  std::vector<double> logs;
  std::vector<double> idx;
  for (std::size_t i = 0; i < dist_tail.size(); ++i) {
    if (dist_tail[i] <= 0.0) {
      rc.kind = RateKind::Finite;
      rc.r_squared = 1.0;
      return rc;
    }
    logs.push_back(std::log(dist_tail[i]));
    idx.push_back(static_cast<double>(i + 1));
  }
  if (logs.size() < 3) throw std::invalid_argument("rate_classify needs at least 3 points");

  const auto fit = [](const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sx += xs[i];
      sy += ys[i];
      sxx += xs[i] * xs[i];
      sxy += xs[i] * ys[i];
      syy += ys[i] * ys[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double intercept = (sy - slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double mean_y = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      ss_res += std::pow(ys[i] - slope * xs[i] - intercept, 2);
      ss_tot += std::pow(ys[i] - mean_y, 2);
    }
    const double r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return std::pair<double, double>(slope, r2);
  };

  const auto [geo_slope, geo_r2] = fit(idx, logs);
  std::vector<double> log_idx(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) log_idx[i] = std::log(idx[i]);
  const auto [pow_slope, pow_r2] = fit(log_idx, logs);

  if (geo_r2 >= pow_r2) {
    rc.kind = RateKind::Geometric;
    rc.tau = std::exp(geo_slope);
    rc.r_squared = geo_r2;
  } else {
    rc.kind = RateKind::Sublinear;
    rc.exponent = pow_slope;
    rc.r_squared = pow_r2;
  }
  return rc;
}

}  // namespace netopt
