#include "netopt/problem.hpp"

namespace netopt {

double ProblemInstance::F(const Eigen::VectorXd& theta) const {
  double v = 0.0;
  for (const auto& o : oracles) v += o->value(theta);
  return v;
}

Eigen::VectorXd ProblemInstance::grad_F(const Eigen::VectorXd& theta) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
  for (const auto& o : oracles) g += o->grad(theta);
  return g;
}

Eigen::MatrixXd ProblemInstance::hess_F(const Eigen::VectorXd& theta) const {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m, m);
  for (const auto& o : oracles) H += o->hess(theta);
  return H;
}

double ProblemInstance::F_c(const Eigen::VectorXd& x) const {
  double v = 0.0;
  for (int i = 0; i < n; ++i) v += oracles[i]->value(block(x, i));
  return v;
}

Eigen::VectorXd ProblemInstance::grad_F_c(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g(static_cast<Eigen::Index>(n) * m);
  for (int i = 0; i < n; ++i) g.segment(static_cast<Eigen::Index>(i) * m, m) = oracles[i]->grad(block(x, i));
  return g;
}

Eigen::MatrixXd ProblemInstance::hess_F_c(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n) * m,
                                            static_cast<Eigen::Index>(n) * m);
  for (int i = 0; i < n; ++i)
    H.block(static_cast<Eigen::Index>(i) * m, static_cast<Eigen::Index>(i) * m, m, m) =
        oracles[i]->hess(block(x, i));
  return H;
}

Eigen::VectorXd ProblemInstance::sum_local_grads(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < n; ++i) g += oracles[i]->grad(block(x, i));
  return g;
}

}  // namespace netopt
