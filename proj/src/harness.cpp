#include "netopt/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "netopt/json_io.hpp"
#include "netopt/problems.hpp"
#include "netopt/rng.hpp"

namespace netopt {

namespace fs = std::filesystem;
using nlohmann::json;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ExperimentConfig preset_quadratic() {
  ExperimentConfig c;
  c.preset = "quadratic";
  c.algo = AlgoChoice::Both;
  c.graph = TopologyKind::Ring;
  c.directed = false;
  c.n = 10;
  c.m = 20;
  c.delta = 0.01;
  c.b_std = 1e3;
  c.alpha_policy = AlphaPolicy::PaperValue;
  c.iters = 6000;
  c.record_stride = 10;
  c.seeds.resize(50);
  for (std::uint64_t s = 0; s < 50; ++s) c.seeds[s] = s + 1;
  c.instance_seed = 1;
  c.vary_instance = false;
  c.init_std = 1.0;
  c.force = true;  // the shared paper step exceeds the DOGT theoretical bound
  return c;
}

ExperimentConfig preset_bilinear(bool directed) {
  ExperimentConfig c;
  c.preset = "bilinear";
  c.algo = directed ? AlgoChoice::Dogt : AlgoChoice::Both;
  c.graph = TopologyKind::Ring;
  c.directed = directed;
  c.n = 5;
  c.m = 2;  // d = p = 1
  c.tau = 0.2;
  c.alpha_policy = AlphaPolicy::PaperValue;
  c.alpha_explicit = 0.9;
  c.iters = 100;
  c.record_stride = 1;
  c.seeds = {1, 2, 3, 4, 5};
  c.vary_instance = true;
  c.init_std = 1.0;
  c.force = true;
  return c;
}

ExperimentConfig preset_gmm(bool directed) {
  ExperimentConfig c;
  c.preset = "gmm";
  c.algo = directed ? AlgoChoice::Dogt : AlgoChoice::Both;
  c.graph = TopologyKind::Ring;
  c.directed = directed;
  c.n = 5;
  c.m = 2;  // two scalar means
  c.sigma_tilde = 1.0;
  c.alpha_policy = AlphaPolicy::PaperValue;
  c.alpha_explicit = 0.1;
  c.iters = 250;
  c.record_stride = 1;
  c.seeds = {1, 2, 3, 4, 5};
  c.vary_instance = true;
  c.init_std = 3.0;
  c.force = true;
  return c;
}

namespace {

ProblemInstance build_problem(const ExperimentConfig& config, std::uint64_t instance_seed) {
  if (config.preset == "quadratic") {
    QuadraticOptions opts;
    opts.b_std = config.b_std;
    opts.convex = config.convex;
    return quadratic_saddle(config.m, config.n, config.delta, instance_seed, opts);
  }
  if (config.preset == "bilinear") {
    // xi uniform in {0,1}, s_i ~ N(xi, 1); re-draw until (0,0) is a strict
    // saddle (sum xi~ s > 2 n tau), which is the regime the experiment studies
    for (std::uint64_t attempt = 0; attempt < 64; ++attempt) {
      Rng rng(Rng::mix(instance_seed + 0x9E37 * attempt) | 1);
      std::vector<Eigen::VectorXd> s(config.n);
      std::vector<int> xi(config.n);
      for (int i = 0; i < config.n; ++i) {
        xi[i] = rng.uniform() < 0.5 ? 0 : 1;
        s[i] = Eigen::VectorXd::Constant(1, xi[i] + rng.normal());
      }
      ProblemInstance prob = bilinear_logistic(s, xi, config.tau, 1, 1);
      if (const KnownCritical* k = prob.known_saddle(); k != nullptr) return prob;
    }
    throw std::runtime_error("bilinear preset: no saddle-bearing draw found");
  }
  if (config.preset == "gmm") {
    Rng rng(Rng::mix(instance_seed) | 1);
    std::vector<Eigen::VectorXd> z(config.n);
    for (int i = 0; i < config.n; ++i) {
      const double mu = rng.uniform() < 0.5 ? 0.0 : -5.0;
      z[i] = Eigen::VectorXd::Constant(1, mu + 5.0 * rng.normal());
    }
    return gaussian_mixture(z, config.sigma_tilde, 2);
  }
  throw std::invalid_argument("unknown preset: " + config.preset);
}

double paper_alpha(const ExperimentConfig& config, const ProblemInstance& problem,
                   const MixingMatrix& D) {
  if (config.preset == "quadratic") {
    // alpha = 0.99 sigma_min(I + D) / max_i |lambda_i(sum Q_i)|
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        problem.hess_F(Eigen::VectorXd::Zero(problem.m)), Eigen::EigenvaluesOnly);
    const double L_c_paper = es.eigenvalues().cwiseAbs().maxCoeff();
    return 0.99 * alpha_max(D, L_c_paper);
  }
  return config.alpha_explicit;  // bilinear 0.9, gmm 0.1
}

}  // namespace

ResolvedExperiment resolve_experiment(const ExperimentConfig& config, std::uint64_t seed) {
  ResolvedExperiment rx;
  rx.problem = build_problem(config, config.vary_instance ? seed : config.instance_seed);
  rx.topo = build_topology(config.graph, config.n, config.directed, config.instance_seed);
  if (config.directed) {
    rx.has_dgd = false;
    rx.R = row_stochastic_weights(rx.topo);
    rx.C = col_stochastic_weights(rx.topo);
    // D left empty: DGD needs an undirected graph
    rx.D = rx.R.kind == StochasticKind::Doubly ? rx.R : rx.C;
  } else {
    rx.D = metropolis_weights(rx.topo);
    rx.R = rx.D;
    rx.C = rx.D;
  }

  switch (config.alpha_policy) {
    case AlphaPolicy::Explicit:
      rx.alpha_dgd = rx.alpha_dogt = config.alpha_explicit;
      break;
    case AlphaPolicy::PaperValue: {
      const MixingMatrix& base = config.directed ? rx.R : rx.D;
      rx.alpha_dgd = rx.alpha_dogt = paper_alpha(config, rx.problem, base);
      break;
    }
    case AlphaPolicy::AutoTheoretical: {
      rx.alpha_dgd = rx.has_dgd ? 0.99 * alpha_max(rx.D, rx.problem.smoothness.L_c) : 0.0;
      const SpectralConstants spec = contraction_factors(rx.R, rx.C);
      rx.alpha_dogt = 0.99 * alpha_bound(spec, rx.problem.smoothness.L_c, rx.problem.smoothness.L,
                                         rx.problem.n)
                                .practical();
      break;
    }
  }
  return rx;
}

namespace {

Eigen::VectorXd initial_x(const ExperimentConfig& config, const ProblemInstance& problem,
                          std::uint64_t seed) {
  Rng rng(Rng::mix(seed ^ 0xA5A5A5A5ULL) | 1);
  const int n = problem.n, m = problem.m;
  Eigen::VectorXd x0(static_cast<Eigen::Index>(n) * m);
  if (config.preset == "quadratic") {
    const KnownCritical* crit = problem.known_criticals.empty() ? nullptr : &problem.known_criticals[0];
    const Eigen::VectorXd center = crit ? crit->theta : Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i)
      x0.segment(static_cast<Eigen::Index>(i) * m, m) = center + rng.normal_vector(m, config.init_std);
  } else {
    // every agent starts at the same random point
    const Eigen::VectorXd p = rng.normal_vector(m, config.init_std);
    for (int i = 0; i < n; ++i) x0.segment(static_cast<Eigen::Index>(i) * m, m) = p;
  }
  return x0;
}

TraceRecord make_record(const ProblemInstance& problem, const Eigen::VectorXd& x, long iter,
                        double lyapunov, double merit, const KnownCritical* saddle) {
  TraceRecord r;
  r.iter = iter;
  r.lyapunov = lyapunov;
  r.merit_d = merit;
  r.x_bar = block_mean(x, problem.n, problem.m);
  r.cons_err = consensus_error(x, problem.n, problem.m) / problem.n;
  r.grad_F_mean_norm = problem.grad_F(r.x_bar).norm();
  if (saddle != nullptr) {
    r.dist_to_saddle = (r.x_bar - saddle->theta).norm();
    r.proj_Eu = saddle->unstable_dir.size() > 0
                    ? std::abs(saddle->unstable_dir.dot(r.x_bar - saddle->theta))
                    : 0.0;
  }
  return r;
}

SeedRunResult run_one(const ExperimentConfig& config, std::uint64_t seed, const std::string& algo) {
  const ResolvedExperiment rx = resolve_experiment(config, seed);
  const KnownCritical* saddle = rx.problem.known_saddle();
  SeedRunResult out;
  out.seed = seed;
  out.algo = algo;

  const Eigen::VectorXd x0 = initial_x(config, rx.problem, seed);
  if (algo == "dgd") {
    if (!rx.has_dgd) throw std::invalid_argument("DGD needs an undirected graph");
    DgdRunOptions opts;
    opts.max_iters = config.iters;
    opts.record_stride = config.record_stride;
    const DgdTrace tr = run_dgd(rx.problem, rx.D, rx.alpha_dgd, x0, opts,
                                [&](const DgdState& s, const DgdDiagnostics& d) {
                                  out.trace.push_back(make_record(
                                      rx.problem, s.x, d.iter, d.L_alpha,
                                      std::numeric_limits<double>::quiet_NaN(), saddle));
                                });
    out.diverged = tr.diverged;
  } else {
    DogtRunOptions opts;
    opts.max_iters = config.iters;
    opts.record_stride = config.record_stride;
    opts.force = config.force;
    const DogtTrace tr = run_dogt(rx.problem, rx.R, rx.C, rx.alpha_dogt, x0,
                                  YInitMode::RandomizedConsensus, opts, Rng::mix(seed ^ 0x5EED),
                                  [&](const DogtState& s, const DogtRecord& d) {
                                    out.trace.push_back(make_record(rx.problem, s.x, d.iter, d.L,
                                                                    d.d, saddle));
                                  });
    out.diverged = tr.diverged;
  }
  if (!out.trace.empty()) {
    const TraceRecord& last = out.trace.back();
    out.final_cons_err = last.cons_err;
    out.final_grad_norm = last.grad_F_mean_norm;
    out.final_lyapunov = last.lyapunov;
  }
  return out;
}

void write_trace_csv(const fs::path& path, const std::vector<TraceRecord>& trace) {
  std::ofstream f(path);
  f << "iter,lyapunov,merit_d,cons_err,grad_F_mean_norm,proj_Eu,dist_to_saddle\n";
  for (const auto& r : trace)
    f << r.iter << ',' << g17(r.lyapunov) << ',' << g17(r.merit_d) << ',' << g17(r.cons_err) << ','
      << g17(r.grad_F_mean_norm) << ',' << g17(r.proj_Eu) << ',' << g17(r.dist_to_saddle) << '\n';
}

void write_traj_csv(const fs::path& path, const std::vector<TraceRecord>& trace) {
  std::ofstream f(path);
  f << "iter";
  if (!trace.empty())
    for (Eigen::Index k = 0; k < trace[0].x_bar.size(); ++k) f << ",xbar_" << k;
  f << '\n';
  for (const auto& r : trace) {
    f << r.iter;
    for (Eigen::Index k = 0; k < r.x_bar.size(); ++k) f << ',' << g17(r.x_bar(k));
    f << '\n';
  }
}

void write_aggregate_csv(const fs::path& path, const std::vector<SeedRunResult>& runs) {
  if (runs.empty()) return;
  const std::size_t len = runs[0].trace.size();
  std::ofstream f(path);
  f << "iter,lyapunov,merit_d,cons_err,grad_F_mean_norm,proj_Eu,dist_to_saddle\n";
  for (std::size_t k = 0; k < len; ++k) {
    double ly = 0, md = 0, ce = 0, gn = 0, pe = 0, ds = 0;
    int cnt = 0;
    for (const auto& run : runs) {
      if (k >= run.trace.size()) continue;
      const auto& r = run.trace[k];
      ly += r.lyapunov;
      md += r.merit_d;
      ce += r.cons_err;
      gn += r.grad_F_mean_norm;
      pe += r.proj_Eu;
      ds += r.dist_to_saddle;
      ++cnt;
    }
    if (cnt == 0) continue;
    f << runs[0].trace[k].iter << ',' << g17(ly / cnt) << ',' << g17(md / cnt) << ','
      << g17(ce / cnt) << ',' << g17(gn / cnt) << ',' << g17(pe / cnt) << ',' << g17(ds / cnt)
      << '\n';
  }
}

void write_contour_csv(const fs::path& path, const ProblemInstance& problem, double lo, double hi,
                       int resolution) {
  std::ofstream f(path);
  f << "x0,x1,F\n";
  Eigen::VectorXd theta(2);
  for (int i = 0; i <= resolution; ++i) {
    theta(0) = lo + (hi - lo) * i / resolution;
    for (int j = 0; j <= resolution; ++j) {
      theta(1) = lo + (hi - lo) * j / resolution;
      f << g17(theta(0)) << ',' << g17(theta(1)) << ',' << g17(problem.F(theta)) << '\n';
    }
  }
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& config) {
  if (config.seeds.empty()) throw std::invalid_argument("experiment config has an empty seed list");
  if (config.preset != "quadratic" && config.preset != "bilinear" && config.preset != "gmm")
    throw std::invalid_argument("unknown preset: " + config.preset);
  if (config.iters <= 0) throw std::invalid_argument("iteration budget must be positive");

  std::vector<std::string> algos;
  if (config.algo == AlgoChoice::Dgd || config.algo == AlgoChoice::Both) algos.push_back("dgd");
  if (config.algo == AlgoChoice::Dogt || config.algo == AlgoChoice::Both) algos.push_back("dogt");
  if (config.directed && config.algo != AlgoChoice::Dogt)
    throw std::invalid_argument("DGD runs need an undirected graph; use --algo dogt on digraphs");

  RunArtifacts artifacts;
  for (const std::string& algo : algos) {
    std::vector<std::future<SeedRunResult>> futures;
    futures.reserve(config.seeds.size());
    for (std::uint64_t seed : config.seeds)
      futures.push_back(std::async(std::launch::async, run_one, config, seed, algo));
    for (auto& fut : futures) artifacts.runs.push_back(fut.get());
  }

  // metadata: resolved constants for the first seed's instance
  const ResolvedExperiment rx = resolve_experiment(config, config.seeds[0]);
  json meta;
  meta["config"] = to_json(config);
  meta["prng"] = std::string(Rng::kName);
  meta["topology"] = to_json(rx.topo);
  meta["problem"] = {{"name", rx.problem.name},
                     {"n", rx.problem.n},
                     {"m", rx.problem.m},
                     {"L_c", rx.problem.smoothness.L_c},
                     {"L", rx.problem.smoothness.L},
                     {"L_estimated", rx.problem.smoothness.estimated},
                     {"L_estimate_radius", rx.problem.smoothness.estimate_radius}};
  meta["alpha"] = {{"dgd", rx.alpha_dgd}, {"dogt", rx.alpha_dogt}};
  if (rx.has_dgd) {
    const SpectralConstants dspec = contraction_factors(rx.D, rx.D);
    meta["dgd"] = {{"alpha_max", alpha_max(rx.D, rx.problem.smoothness.L_c)},
                   {"sigma2", dspec.sigma2}};
  }
  {
    const SpectralConstants spec = contraction_factors(rx.R, rx.C);
    const AlphaBounds ab =
        alpha_bound(spec, rx.problem.smoothness.L_c, rx.problem.smoothness.L, rx.problem.n);
    const bool admissible = rx.alpha_dogt <= ab.practical();
    const LyapunovParams params =
        default_params(spec, rx.problem.smoothness.L_c, rx.problem.smoothness.L, rx.problem.n,
                       admissible ? rx.alpha_dogt : 0.99 * ab.practical());
    meta["dogt"] = {{"rho_R", spec.rho_R},
                    {"rho_C", spec.rho_C},
                    {"zeta", spec.zeta},
                    {"alpha_tilde", {ab.tilde1, ab.tilde2, ab.tilde3}},
                    {"alpha_final_bound", ab.final_bound},
                    {"regime", admissible ? "admissible" : "forced"},
                    {"eps_x", params.eps_x},
                    {"eps_y", params.eps_y},
                    {"eps", params.eps},
                    {"varkappa", params.varkappa},
                    {"rho_tilde_R", params.rho_tilde_R},
                    {"rho_tilde_C", params.rho_tilde_C},
                    {"Gamma", params.Gamma},
                    {"M", params.M},
                    {"K_len", params.K_len},
                    {"constants_alpha", params.alpha}};
  }
  artifacts.metadata_json = meta.dump(2);

  if (!config.out_dir.empty()) {
    fs::create_directories(config.out_dir);
    const fs::path dir(config.out_dir);
    for (const auto& run : artifacts.runs) {
      write_trace_csv(dir / ("trace_" + run.algo + "_seed" + std::to_string(run.seed) + ".csv"),
                      run.trace);
      if (rx.problem.m == 2)
        write_traj_csv(dir / ("traj_" + run.algo + "_seed" + std::to_string(run.seed) + ".csv"),
                       run.trace);
    }
    for (const std::string& algo : algos) {
      std::vector<SeedRunResult> subset;
      for (const auto& run : artifacts.runs)
        if (run.algo == algo) subset.push_back(run);
      write_aggregate_csv(dir / ("aggregate_" + algo + ".csv"), subset);
    }
    if (rx.problem.m == 2) {
      const double lo = config.preset == "gmm" ? -10.0 : -3.0;
      const double hi = config.preset == "gmm" ? 5.0 : 3.0;
      write_contour_csv(dir / "contour.csv", rx.problem, lo, hi, 100);
    }
    std::ofstream mf(dir / "metadata.json");
    mf << artifacts.metadata_json << '\n';
  }
  return artifacts;
}

std::vector<CompareRow> compare(const std::vector<SeedRunResult>& runs) {
  std::vector<CompareRow> rows;
  for (const auto& run : runs) {
    CompareRow row;
    row.algo = run.algo;
    row.seed = run.seed;
    row.final_cons_err = run.final_cons_err;
    row.final_grad_norm = run.final_grad_norm;
    row.final_lyapunov = run.final_lyapunov;
    if (!run.trace.empty() && run.trace.front().proj_Eu > 0.0)
      row.escaped = run.trace.back().proj_Eu > 10.0 * run.trace.front().proj_Eu;
    rows.push_back(row);
  }
  return rows;
}

std::string format_compare_table(const std::vector<CompareRow>& rows) {
  std::ostringstream os;
  os << "algo    seed  cons_err      grad_F_mean   lyapunov      escaped\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof(line), "%-7s %-5llu %-13.6g %-13.6g %-13.6g %s\n", r.algo.c_str(),
                  static_cast<unsigned long long>(r.seed), r.final_cons_err, r.final_grad_norm,
                  r.final_lyapunov, r.escaped ? "yes" : "no");
    os << line;
  }
  return os.str();
}

}  // namespace netopt
