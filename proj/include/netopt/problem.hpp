#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace netopt {

/// Per-agent smooth oracle: value, gradient, Hessian at a flattened point.
class LocalOracle {
 public:
  virtual ~LocalOracle() = default;
  virtual double value(const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::VectorXd grad(const Eigen::VectorXd& theta) const = 0;
  virtual Eigen::MatrixXd hess(const Eigen::VectorXd& theta) const = 0;
};

/// Lipschitz constants of the gradients/Hessians. L_c is the stacked-gradient
/// constant (= L_max), L the constant of grad F. Estimated constants carry the
/// estimation region and the 1.5 safety factor already applied.
struct SmoothnessData {
  Eigen::VectorXd L_i;
  Eigen::VectorXd L_hess_i;
  double L_max = 0.0;
  double L_c = 0.0;
  double L = 0.0;
  double L_hess = 0.0;    // sum of L_hess_i
  double L_hess_c = 0.0;  // max of L_hess_i
  bool estimated = false;
  double estimate_radius = 0.0;

  void finalize() {
    L_max = L_i.size() ? L_i.maxCoeff() : 0.0;
    L_c = L_max;
    L = L_i.sum();
    L_hess = L_hess_i.size() ? L_hess_i.sum() : 0.0;
    L_hess_c = L_hess_i.size() ? L_hess_i.maxCoeff() : 0.0;
  }
};

enum class CriticalKind { LocalMinCandidate, StrictSaddle };

struct KnownCritical {
  Eigen::VectorXd theta;
  CriticalKind kind = CriticalKind::LocalMinCandidate;
  double lambda_min = 0.0;
  Eigen::VectorXd unstable_dir;  // empty for minima
};

/// F(theta) = sum_i f_i(theta) with n local oracles over R^m (matrix-shaped
/// variables are flattened column-major). Oracles are pure and reentrant.
struct ProblemInstance {
  std::string name;
  int n = 0;
  int m = 0;
  std::vector<std::shared_ptr<const LocalOracle>> oracles;
  SmoothnessData smoothness;
  std::vector<KnownCritical> known_criticals;
  /// Lower bound on <grad f_i(theta), theta/|theta|> valid for every agent at
  /// a given radius, when the problem class admits one.
  std::function<double(double radius)> radial_lower_bound;

  double F(const Eigen::VectorXd& theta) const;
  Eigen::VectorXd grad_F(const Eigen::VectorXd& theta) const;
  Eigen::MatrixXd hess_F(const Eigen::VectorXd& theta) const;

  /// Stacked aggregate F_c(x) = sum_i f_i(x_i), x in R^{n m}.
  double F_c(const Eigen::VectorXd& x) const;
  Eigen::VectorXd grad_F_c(const Eigen::VectorXd& x) const;
  /// Block-diagonal Hessian of F_c, dense (nm x nm).
  Eigen::MatrixXd hess_F_c(const Eigen::VectorXd& x) const;
  /// sum_i grad f_i(x_i), an m-vector.
  Eigen::VectorXd sum_local_grads(const Eigen::VectorXd& x) const;

  Eigen::Ref<const Eigen::VectorXd> block(const Eigen::VectorXd& x, int i) const {
    return x.segment(static_cast<Eigen::Index>(i) * m, m);
  }

  const KnownCritical* known_saddle() const {
    for (const auto& k : known_criticals)
      if (k.kind == CriticalKind::StrictSaddle) return &k;
    return nullptr;
  }
  const KnownCritical* known_minimum() const {
    for (const auto& k : known_criticals)
      if (k.kind == CriticalKind::LocalMinCandidate) return &k;
    return nullptr;
  }
};

}  // namespace netopt
