#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "netopt/dgd.hpp"
#include "netopt/dogt.hpp"
#include "netopt/mixing.hpp"
#include "netopt/problem.hpp"
#include "netopt/topology.hpp"

namespace netopt {

enum class AlgoChoice { Dgd, Dogt, Both };
enum class AlphaPolicy { Explicit, AutoTheoretical, PaperValue };

/// Fully deterministic run plan: problem preset + parameters, graph, step
/// policy, iteration budget, seed list, initialization recipe, output paths.
struct ExperimentConfig {
  std::string preset = "quadratic";  // quadratic | bilinear | gmm
  AlgoChoice algo = AlgoChoice::Both;
  TopologyKind graph = TopologyKind::Ring;
  bool directed = false;
  int n = 10;
  int m = 20;
  double delta = 0.01;
  double b_std = 1e3;
  bool convex = false;
  double tau = 0.2;
  double sigma_tilde = 1.0;
  AlphaPolicy alpha_policy = AlphaPolicy::PaperValue;
  double alpha_explicit = 0.0;
  long iters = 6000;
  long record_stride = 10;
  std::vector<std::uint64_t> seeds;
  std::uint64_t instance_seed = 1;
  bool vary_instance = false;  // re-draw the problem per seed (bilinear/gmm style)
  double init_std = 1.0;
  bool force = false;
  std::string out_dir;
};

ExperimentConfig preset_quadratic();
ExperimentConfig preset_bilinear(bool directed);
ExperimentConfig preset_gmm(bool directed);

/// Per-iteration harness record; cons_err is the paper's
/// (1/n) sqrt(sum_i |z_i - zbar|^2) with the arithmetic mean.
struct TraceRecord {
  long iter = 0;
  double lyapunov = 0.0;
  double merit_d = 0.0;  // NaN for DGD
  double cons_err = 0.0;
  double grad_F_mean_norm = 0.0;
  double proj_Eu = 0.0;         // |<xbar - theta*, u^u>| when a saddle is registered
  double dist_to_saddle = 0.0;  // |xbar - theta*|
  Eigen::VectorXd x_bar;
};

struct SeedRunResult {
  std::uint64_t seed = 0;
  std::string algo;
  std::vector<TraceRecord> trace;
  double final_cons_err = 0.0;
  double final_grad_norm = 0.0;
  double final_lyapunov = 0.0;
  bool diverged = false;
};

struct RunArtifacts {
  std::vector<SeedRunResult> runs;
  std::string metadata_json;  // also written to out_dir when set
};

/// Resolves the config (problem, graph, weights, alpha), executes every
/// (algo, seed) pair, writes per-seed CSV traces, aggregate mean curves and
/// a metadata JSON when out_dir is set, and returns everything in memory.
RunArtifacts run_experiment(const ExperimentConfig& config);

struct CompareRow {
  std::string algo;
  std::uint64_t seed = 0;
  double final_cons_err = 0.0;
  double final_grad_norm = 0.0;
  double final_lyapunov = 0.0;
  bool escaped = false;  // final proj_Eu > 10x initial, when tracked
};

/// Side-by-side final-metric table for the given runs.
std::vector<CompareRow> compare(const std::vector<SeedRunResult>& runs);
std::string format_compare_table(const std::vector<CompareRow>& rows);

/// 17-significant-digit float formatting used by every CSV artifact.
std::string g17(double v);

/// Builds the (problem, D or R/C) pair a config resolves to, exposed for
/// tests and the acceptance suite.
struct ResolvedExperiment {
  ProblemInstance problem;
  Topology topo;
  MixingMatrix D;  // doubly-stochastic for DGD (undirected graphs)
  MixingMatrix R;
  MixingMatrix C;
  double alpha_dgd = 0.0;
  double alpha_dogt = 0.0;
  bool has_dgd = true;
};

ResolvedExperiment resolve_experiment(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace netopt
