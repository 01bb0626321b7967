#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

#include <Eigen/Core>

namespace netopt {

/// Counter-based PRNG ("sm64c/v1"): the k-th output is a pure function of
/// (key, k), so seeds are portable across platforms and runs are replayable
/// from metadata alone. The mixer is the splitmix64 finalizer.
class Rng {
 public:
  static constexpr std::string_view kName = "sm64c/v1";

  explicit Rng(std::uint64_t key) : key_(key), ctr_(0) {}

  /// Independent substream: fork(i) and fork(j) never share outputs for i != j.
  Rng fork(std::uint64_t stream) const { return Rng(mix(key_ ^ mix(stream + 0x632BE59BD9B4E019ULL))); }

  std::uint64_t next_u64() { return mix(key_ + 0x9E3779B97F4A7C15ULL * ++ctr_); }

  /// Uniform on (0,1), endpoints excluded so log() is always safe.
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Box-Muller; no rejection loop, so the consumed counter count is fixed.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double mag = std::sqrt(-2.0 * std::log(u1));
    spare_ = mag * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return mag * std::cos(2.0 * M_PI * u2);
  }

  Eigen::VectorXd normal_vector(Eigen::Index n, double stddev = 1.0) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = stddev * normal();
    return v;
  }

  Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, double stddev = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = stddev * normal();
    return m;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  /// Uniform direction on the unit sphere in R^n.
  Eigen::VectorXd sphere(Eigen::Index n) {
    Eigen::VectorXd v = normal_vector(n);
    double nrm = v.norm();
    while (nrm < 1e-12) {
      v = normal_vector(n);
      nrm = v.norm();
    }
    return v / nrm;
  }

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ULL;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBULL;
    z ^= z >> 31;
    return z;
  }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace netopt
