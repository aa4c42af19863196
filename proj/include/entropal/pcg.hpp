#ifndef ENTROPAL_PCG_HPP
#define ENTROPAL_PCG_HPP

#include <cmath>
#include <functional>
#include <sstream>

#include "entropal/errors.hpp"
#include "entropal/sym_matrix.hpp"

namespace entropal {

struct PcgConfig {
  double tol = 1e-10;  // absolute residual target
  int max_iter = 500;
};

template <class Vec>
struct PcgResult {
  Vec x;
  int iterations = 0;
  double residual_norm = 0.0;
  bool truncated = false;  // hit max_iter before reaching tol
};

// Matrix-free preconditioned CG for self-adjoint positive definite operators.
// Works on any inner-product space providing inner(), norm_of() and the usual
// vector arithmetic (both R^m and S^n with the Frobenius product qualify).
// Throws NumericalError on non-finite values or loss of positive
// definiteness.
template <class Vec, class Apply, class Precond>
PcgResult<Vec> pcg_solve(Apply&& apply, const Vec& rhs, const PcgConfig& cfg,
                         Precond&& precond, const Vec& x0) {
  PcgResult<Vec> out;
  out.x = x0;
  Vec r = rhs - apply(out.x);
  double rnorm = norm_of(r);
  if (rnorm <= cfg.tol) {
    out.residual_norm = rnorm;
    return out;
  }
  Vec s = precond(r);
  Vec p = s;
  double rho = inner(r, s);
  for (int it = 0; it < cfg.max_iter; ++it) {
    Vec q = apply(p);
    double pq = inner(p, q);
    if (!std::isfinite(pq) || !std::isfinite(rho)) {
      std::ostringstream msg;
      msg << "pcg_solve: non-finite values at iteration " << it;
      throw NumericalError(msg.str());
    }
    if (pq <= 0.0) {
      std::ostringstream msg;
      msg << "pcg_solve: operator not positive definite at iteration " << it
          << " (<p,Ap> = " << pq << ")";
      throw NumericalError(msg.str());
    }
    double alpha = rho / pq;
    out.x = out.x + alpha * p;
    r = r - alpha * q;
    out.iterations = it + 1;
    rnorm = norm_of(r);
    if (!std::isfinite(rnorm)) {
      std::ostringstream msg;
      msg << "pcg_solve: non-finite residual at iteration " << it;
      throw NumericalError(msg.str());
    }
    if (rnorm <= cfg.tol) {
      out.residual_norm = rnorm;
      return out;
    }
    s = precond(r);
    double rho_next = inner(r, s);
    p = s + (rho_next / rho) * p;
    rho = rho_next;
  }
  out.residual_norm = rnorm;
  out.truncated = true;
  return out;
}

template <class Vec, class Apply>
PcgResult<Vec> pcg_solve(Apply&& apply, const Vec& rhs, const PcgConfig& cfg,
                         const Vec& x0) {
  return pcg_solve(
      apply, rhs, cfg, [](const Vec& r) { return r; }, x0);
}

// Diagonal (Jacobi) preconditioner extracted by probing the operator with
// coordinate directions. Opt-in: costs one apply per coordinate.
std::function<Eigen::VectorXd(const Eigen::VectorXd&)>
probe_diagonal_preconditioner(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply, int n);

std::function<SymMatrix(const SymMatrix&)> probe_diagonal_preconditioner_sym(
    const std::function<SymMatrix(const SymMatrix&)>& apply, int n);

}  // namespace entropal

#endif
