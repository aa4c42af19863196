#include "entropal/pcg.hpp"

#include <memory>

namespace entropal {

std::function<Eigen::VectorXd(const Eigen::VectorXd&)>
probe_diagonal_preconditioner(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply, int n) {
  auto diag = std::make_shared<Eigen::VectorXd>(n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    e[i] = 1.0;
    (*diag)[i] = std::max(apply(e)[i], 1e-12);
    e[i] = 0.0;
  }
  return [diag](const Eigen::VectorXd& r) -> Eigen::VectorXd {
    return r.cwiseQuotient(*diag);
  };
}

std::function<SymMatrix(const SymMatrix&)> probe_diagonal_preconditioner_sym(
    const std::function<SymMatrix(const SymMatrix&)>& apply, int n) {
  // Probe with the orthonormal basis E_ii and (E_ij + E_ji)/sqrt(2).
  auto diag = std::make_shared<Eigen::MatrixXd>(n, n);
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      double v = (i == j) ? 1.0 : 1.0 / std::sqrt(2.0);
      e(i, j) = e(j, i) = v;
      SymMatrix out = apply(SymMatrix::raw(e));
      double dii = (i == j) ? out(i, i) : std::sqrt(2.0) * out(i, j);
      (*diag)(i, j) = (*diag)(j, i) = std::max(dii, 1e-12);
      e(i, j) = e(j, i) = 0.0;
    }
  }
  return [diag](const SymMatrix& r) -> SymMatrix {
    return SymMatrix::raw(r.mat().cwiseQuotient(*diag));
  };
}

}  // namespace entropal
