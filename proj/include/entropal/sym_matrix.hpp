#ifndef ENTROPAL_SYM_MATRIX_HPP
#define ENTROPAL_SYM_MATRIX_HPP

#include <utility>

#include <Eigen/Core>

#include "entropal/errors.hpp"

namespace entropal {

// Dense real symmetric matrix. Symmetry is enforced at construction
// (averaging with the transpose), entries are checked finite, and the value
// is immutable afterwards, so instances can be shared freely.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols())
      throw std::invalid_argument("SymMatrix: matrix must be square");
    mat_ = 0.5 * (m + m.transpose());
    if (!mat_.allFinite())
      throw std::invalid_argument("SymMatrix: non-finite entries");
  }

  static SymMatrix Zero(int n) { return SymMatrix(Eigen::MatrixXd::Zero(n, n)); }
  static SymMatrix Identity(int n) {
    return SymMatrix(Eigen::MatrixXd::Identity(n, n));
  }
  static SymMatrix ScaledIdentity(int n, double s) {
    return SymMatrix(Eigen::MatrixXd(s * Eigen::MatrixXd::Identity(n, n)));
  }

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Eigen::MatrixXd& mat() const { return mat_; }
  double operator()(int i, int j) const { return mat_(i, j); }

  double trace() const { return mat_.trace(); }
  double norm() const { return mat_.norm(); }

  SymMatrix operator+(const SymMatrix& o) const { return raw(mat_ + o.mat_); }
  SymMatrix operator-(const SymMatrix& o) const { return raw(mat_ - o.mat_); }
  SymMatrix operator-() const { return raw(-mat_); }
  friend SymMatrix operator*(double s, const SymMatrix& m) {
    return raw(s * m.mat_);
  }

  // Trusted constructor for expressions that are symmetric by construction;
  // skips the symmetrizing copy.
  static SymMatrix raw(Eigen::MatrixXd m) {
    SymMatrix out;
    out.mat_ = std::move(m);
    return out;
  }

 private:
  Eigen::MatrixXd mat_;
};

// Frobenius inner product; this is the inner product of the S^n vector space
// used by PCG and the power iteration.
inline double inner(const SymMatrix& a, const SymMatrix& b) {
  return (a.mat().array() * b.mat().array()).sum();
}

inline double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return a.dot(b);
}

inline double norm_of(const SymMatrix& a) { return a.norm(); }
inline double norm_of(const Eigen::VectorXd& a) { return a.norm(); }

}  // namespace entropal

#endif
