#include <doctest.h>

#include <algorithm>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "netopt/mixing.hpp"
#include "netopt/rng.hpp"
#include "netopt/topology.hpp"

using namespace netopt;

namespace {

// independent reachability oracle: boolean transitive closure
bool strongly_connected_oracle(const Topology& t) {
  const int n = t.n;
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) reach[i][i] = true;
  for (const auto& [a, b] : t.edges) {
    reach[a][b] = true;
    if (!t.directed) reach[b][a] = true;
  }
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!reach[i][j]) return false;
  return true;
}

MixingMatrix random_lazy_row_stochastic(int n, std::uint64_t seed) {
  const Topology topo = build_topology(TopologyKind::RandomStronglyConnected, n, true, seed);
  return lazy_transform(row_stochastic_weights(topo), 2.0);
}

}  // namespace

TEST_CASE("topology builders") {
  const Topology ring3 = build_topology(TopologyKind::Ring, 3, false);
  CHECK(ring3.edges.size() == 3);
  CHECK(ring3.has_edge(0, 1));
  CHECK(ring3.has_edge(1, 2));
  CHECK(ring3.has_edge(2, 0));

  const Topology k2 = build_topology(TopologyKind::Complete, 2, false);
  CHECK(k2.edges.size() == 1);

  const Topology rnd = build_topology(TopologyKind::RandomStronglyConnected, 10, true, 7);
  CHECK(strongly_connected_oracle(rnd));

  CHECK_THROWS(build_topology(TopologyKind::Ring, 1, false));
  // two components, no bridge
  CHECK_THROWS(custom_topology(4, false, {{0, 1}, {2, 3}}));
  CHECK_THROWS(custom_topology(3, false, {{0, 0}}));
  // directed chain missing the return edge is not strongly connected
  CHECK_THROWS(custom_topology(3, true, {{0, 1}, {1, 2}}));
}

TEST_CASE("metropolis weights") {
  const MixingMatrix k2 = metropolis_weights(build_topology(TopologyKind::Complete, 2, false));
  CHECK(k2.W(0, 0) == doctest::Approx(0.5));
  CHECK(k2.W(0, 1) == doctest::Approx(0.5));
  CHECK(sigma2_of(k2.W) == doctest::Approx(0.0).epsilon(1e-12));

  const MixingMatrix p2 = metropolis_weights(build_topology(TopologyKind::Path, 2, false));
  CHECK((p2.W - k2.W).norm() == doctest::Approx(0.0));

  // ring n=3 is the circulant with every entry 1/3; direct eigensolve oracle
  const MixingMatrix r3 = metropolis_weights(build_topology(TopologyKind::Ring, 3, false));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) CHECK(r3.W(i, j) == doctest::Approx(1.0 / 3));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r3.W);
  Eigen::VectorXd abs_eigs = es.eigenvalues().cwiseAbs();
  std::sort(abs_eigs.data(), abs_eigs.data() + abs_eigs.size());
  CHECK(sigma2_of(r3.W) == doctest::Approx(abs_eigs(1)).epsilon(1e-12));
  CHECK(sigma2_of(r3.W) < 1e-12);  // circulant(1/3,1/3,1/3) has spectrum {1,0,0}

  CHECK_THROWS(metropolis_weights(build_topology(TopologyKind::Ring, 3, true)));
}

TEST_CASE("uniform row and column weights") {
  const Topology ring4 = build_topology(TopologyKind::Ring, 4, false);
  const MixingMatrix R = row_stochastic_weights(ring4);
  for (int i = 0; i < 4; ++i) {
    CHECK(R.W(i, i) == doctest::Approx(1.0 / 3));
    CHECK(R.W(i, (i + 1) % 4) == doctest::Approx(1.0 / 3));
    CHECK(R.W(i, (i + 3) % 4) == doctest::Approx(1.0 / 3));
  }
  CHECK(R.kind == StochasticKind::Doubly);  // circulant => doubly stochastic
  for (int i = 0; i < 4; ++i) CHECK(R.perron_left(i) == doctest::Approx(0.25));

  const Topology cyc3 = build_topology(TopologyKind::Ring, 3, true);
  const MixingMatrix C = col_stochastic_weights(cyc3);
  for (int j = 0; j < 3; ++j) {
    CHECK(C.W(j, j) == doctest::Approx(0.5));
    CHECK(C.W((j + 1) % 3, j) == doctest::Approx(0.5));
  }
  for (int i = 0; i < 3; ++i) CHECK(C.perron_right(i) == doctest::Approx(1.0 / 3));

  const Topology k2 = build_topology(TopologyKind::Complete, 2, false);
  const MixingMatrix R2 = row_stochastic_weights(k2);
  const MixingMatrix C2 = col_stochastic_weights(k2);
  CHECK((R2.W - C2.W).norm() == doctest::Approx(0.0));
  CHECK(R2.W(0, 0) == doctest::Approx(0.5));
}

TEST_CASE("lazy transform") {
  const MixingMatrix M = metropolis_weights(build_topology(TopologyKind::Ring, 5, false));
  const MixingMatrix same = lazy_transform(M, 1.0);
  CHECK((same.W - M.W).norm() == doctest::Approx(0.0));

  MixingMatrix swap;
  swap.W.resize(2, 2);
  swap.W << 0, 1, 1, 0;
  swap.kind = StochasticKind::Doubly;
  swap.perron_left = Eigen::VectorXd::Constant(2, 0.5);
  swap.perron_right = swap.perron_left;
  const MixingMatrix half = lazy_transform(swap, 2.0);
  CHECK(half.W(0, 0) == doctest::Approx(0.5));
  CHECK(half.W(0, 1) == doctest::Approx(0.5));

  CHECK_THROWS(lazy_transform(M, 0.5));

  // determinant oracle: t=2 output nonsingular on every test topology
  for (int n : {3, 4, 5, 8}) {
    const MixingMatrix W = metropolis_weights(build_topology(TopologyKind::Ring, n, false));
    CHECK(std::abs(lazy_transform(W, 2.0).W.determinant()) > 1e-12);
  }
}

TEST_CASE("perron vectors") {
  const MixingMatrix D = metropolis_weights(build_topology(TopologyKind::Ring, 6, false));
  const Eigen::VectorXd r = perron_vector(D.W, true);
  for (int i = 0; i < 6; ++i) CHECK(r(i) == doctest::Approx(1.0 / 6));

  Eigen::MatrixXd absorbing(2, 2);
  absorbing << 1, 0, 0.5, 0.5;
  const Eigen::VectorXd ra = perron_vector(absorbing, true);
  CHECK(ra(0) == doctest::Approx(1.0));
  CHECK(ra(1) == doctest::Approx(0.0));

  const MixingMatrix R5 = random_lazy_row_stochastic(5, 3);
  CHECK((R5.W.transpose() * R5.perron_left - R5.perron_left).norm() < 1e-12);

  // power-iteration path agrees with the dense eigensolve
  const Eigen::VectorXd rp = perron_power_iteration(R5.W, true);
  CHECK((rp - R5.perron_left).norm() < 1e-9);
}

TEST_CASE("contraction factors and norm equivalence") {
  const MixingMatrix D = metropolis_weights(build_topology(TopologyKind::Ring, 10, false));
  const SpectralConstants s = contraction_factors(D, D);
  // doubly-stochastic: the similarity scaling cancels, rho_R = sigma2
  CHECK(s.rho_R == doctest::Approx(s.sigma2).epsilon(1e-12));
  CHECK(s.rho_R < 1.0);
  CHECK(s.zeta == doctest::Approx(0.1));
  // direct SVD oracle of the scaled matrix
  const Eigen::VectorXd sq = D.perron_left.array().sqrt();
  const Eigen::MatrixXd scaled =
      Eigen::MatrixXd(sq.asDiagonal()) * D.W * Eigen::MatrixXd(sq.cwiseInverse().asDiagonal());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
  CHECK(s.rho_R == doctest::Approx(svd.singularValues()(1)).epsilon(1e-12));

  MixingMatrix one;
  one.W = Eigen::MatrixXd::Ones(1, 1);
  one.kind = StochasticKind::Doubly;
  one.perron_left = Eigen::VectorXd::Ones(1);
  one.perron_right = one.perron_left;
  const SpectralConstants s1 = contraction_factors(one, one);
  CHECK(s1.rho_R == 0.0);
  CHECK(s1.zeta == doctest::Approx(1.0));

  // definitional norm ||R - 1 r^T||_R equals the sigma2 formula
  const MixingMatrix R5 = random_lazy_row_stochastic(5, 11);
  const MixingMatrix C5 = lazy_transform(
      col_stochastic_weights(build_topology(TopologyKind::RandomStronglyConnected, 5, true, 11)),
      2.0);
  const SpectralConstants s5 = contraction_factors(R5, C5);
  CHECK(contraction_norm_R(R5.W, R5.perron_left) == doctest::Approx(s5.rho_R).epsilon(1e-10));
  CHECK(contraction_norm_C(C5.W, C5.perron_right) == doctest::Approx(s5.rho_C).epsilon(1e-10));
  CHECK(s5.rho_R < 1.0);
  CHECK(s5.rho_C < 1.0);
  CHECK(s5.zeta > 0.0);

  // norm equivalence constants, checked on random vectors
  Rng rng(99);
  for (int k = 0; k < 200; ++k) {
    const Eigen::VectorXd v = rng.normal_vector(5);
    const double n2 = v.norm();
    const double nR = weighted_norm_R(v, R5.perron_left);
    const double nC = weighted_norm_C(v, C5.perron_right);
    CHECK(nR <= s5.K_R2 * n2 * (1 + 1e-12));
    CHECK(n2 <= s5.K_2R * nR * (1 + 1e-12));
    CHECK(nC <= s5.K_C2 * n2 * (1 + 1e-12));
    CHECK(n2 <= s5.K_2C * nC * (1 + 1e-12));
    CHECK(nR <= s5.K_RC * nC * (1 + 1e-12));
    CHECK(nC <= s5.K_CR * nR * (1 + 1e-12));
  }
}

TEST_CASE("randomized weight invariants") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int n = 3 + static_cast<int>(seed % 8);
    const bool directed = seed % 2 == 0;
    const Topology topo =
        build_topology(TopologyKind::RandomStronglyConnected, n, directed, seed + 100);
    const MixingMatrix R = lazy_transform(row_stochastic_weights(topo), 2.0);
    const MixingMatrix C = lazy_transform(col_stochastic_weights(topo), 2.0);
    CHECK(R.stochasticity_residual() < 1e-12);
    CHECK(C.stochasticity_residual() < 1e-12);
    CHECK(R.perron_residual() < 1e-10);
    CHECK(C.perron_residual() < 1e-10);
    CHECK(R.compliant_with(topo));
    CHECK(C.compliant_with(topo));
    for (int i = 0; i < n; ++i) {
      CHECK(R.W(i, i) > 0.0);
      CHECK(C.W(i, i) > 0.0);
    }
    const SpectralConstants s = contraction_factors(R, C);
    CHECK(s.rho_R < 1.0);
    CHECK(s.rho_C < 1.0);
    CHECK(s.zeta > 0.0);
    if (!directed) {
      const MixingMatrix D = metropolis_weights(topo);
      CHECK(D.stochasticity_residual() < 1e-12);
      CHECK((D.W - D.W.transpose()).norm() < 1e-13);
      CHECK(D.compliant_with(topo));
    }
  }
}
