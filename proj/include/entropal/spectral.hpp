#ifndef ENTROPAL_SPECTRAL_HPP
#define ENTROPAL_SPECTRAL_HPP

#include <functional>

#include <Eigen/Core>

#include "entropal/sym_matrix.hpp"

namespace entropal {

// Eigendecomposition of a symmetric matrix: W = Q diag(lambda) Q^T with
// lambda ascending and Q orthonormal.
struct EigenDecomposition {
  Eigen::VectorXd lambda;
  Eigen::MatrixXd Q;

  int dim() const { return static_cast<int>(lambda.size()); }
  double lambda_min() const { return lambda.size() ? lambda[0] : 0.0; }
  double lambda_max() const {
    return lambda.size() ? lambda[lambda.size() - 1] : 0.0;
  }

  SymMatrix reconstruct() const {
    return SymMatrix::raw(Q * lambda.asDiagonal() * Q.transpose());
  }
  // Q diag(vals) Q^T for caller-supplied spectrum values.
  SymMatrix assemble(const Eigen::VectorXd& vals) const {
    return SymMatrix::raw(Q * vals.asDiagonal() * Q.transpose());
  }
};

enum class EigEngine {
  Auto,        // Jacobi for small n, tridiagonal QL beyond
  Jacobi,      // cyclic Jacobi rotations
  Tridiagonal  // Householder reduction + implicit-shift QL
};

// Dense symmetric eigendecomposition, implemented in-repo (no LAPACK).
// Throws NumericalError if the iteration cap is hit, naming the residual.
EigenDecomposition sym_eigen(const SymMatrix& W, EigEngine engine = EigEngine::Auto);

// Q diag(phi(lambda)) Q^T. Throws DomainError (carrying lambda_min) when phi
// is non-finite at some eigenvalue, e.g. log at lambda <= 0.
SymMatrix spectral_apply(const EigenDecomposition& d,
                         const std::function<double(double)>& phi);

SymMatrix psd_project(const SymMatrix& W);
SymMatrix psd_project(const EigenDecomposition& d);

// First divided differences of phi at lambda: omega[i][j] =
// (phi(l_i)-phi(l_j))/(l_i-l_j), with phi' on the diagonal and at clustered
// eigenvalues (midpoint rule guards against cancellation).
Eigen::MatrixXd loewner_table(const Eigen::VectorXd& lambda,
                              const std::function<double(double)>& phi,
                              const std::function<double(double)>& dphi);

// Derivative of the spectral function X -> phi(X) at X = Q diag(lambda) Q^T
// applied to H:  Q (omega o (Q^T H Q)) Q^T.
SymMatrix loewner_apply(const EigenDecomposition& d,
                        const std::function<double(double)>& phi,
                        const std::function<double(double)>& dphi,
                        const SymMatrix& H);

// Same action given a precomputed table.
SymMatrix loewner_apply_table(const EigenDecomposition& d,
                              const Eigen::MatrixXd& omega, const SymMatrix& H);

// Divided-difference table of t -> max(t,0). Tied zero eigenvalues get 0,
// which keeps the operator PSD and deterministic.
Eigen::MatrixXd psd_plus_table(const Eigen::VectorXd& lambda);

// One Clarke element of the projection Jacobian at W (eigendecomposition d),
// applied to H. Self-adjoint and PSD; identity for W > 0, zero for W < 0.
SymMatrix psd_project_jacobian_apply(const EigenDecomposition& d,
                                     const SymMatrix& H);

struct LambdaMaxEstimate {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Largest eigenvalue of a self-adjoint PSD operator by power iteration.
// The returned value carries a (1 + 1e-6) safeguard so it never
// underestimates within tolerance. On hitting the cap the best estimate is
// returned with converged = false.
template <class Vec, class Apply>
LambdaMaxEstimate operator_lambda_max(Apply&& apply, const Vec& start,
                                      int max_iter = 1000, double tol = 1e-8) {
  LambdaMaxEstimate est;
  double ns = norm_of(start);
  if (!(ns > 0.0)) return est;
  Vec v = (1.0 / ns) * start;
  double rayleigh_prev = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    Vec w = apply(v);
    double rayleigh = inner(v, w);
    double nw = norm_of(w);
    est.iterations = it + 1;
    est.value = rayleigh;
    if (nw <= 1e-300) {  // operator annihilates the direction
      est.converged = true;
      break;
    }
    if (it > 0 && std::abs(rayleigh - rayleigh_prev) <=
                      tol * std::max(1.0, std::abs(rayleigh))) {
      est.converged = true;
      break;
    }
    rayleigh_prev = rayleigh;
    v = (1.0 / nw) * w;
  }
  est.value *= 1.0 + 1e-6;
  return est;
}

// Deterministic seeded start vectors for the power iteration.
Eigen::VectorXd power_seed_vector(int n, std::uint64_t seed = 0x5eed);
SymMatrix power_seed_sym(int n, std::uint64_t seed = 0x5eed);

}  // namespace entropal

#endif
