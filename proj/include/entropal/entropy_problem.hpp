#ifndef ENTROPAL_ENTROPY_PROBLEM_HPP
#define ENTROPAL_ENTROPY_PROBLEM_HPP

#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "entropal/sym_matrix.hpp"

namespace entropal {

// Constraint atoms on S^n. Each atom maps X to one or more reals; a
// ConstraintMap is an ordered list of (atom, coefficient) rows.
struct TraceAtom {};
struct EntryAtom {
  int i = 0, j = 0;  // i <= j, normalized at insertion
};
struct DiagAtom {};  // emits all n diagonal entries
struct EdgeQuadAtom {
  int s = 0, t = 0;  // s < t; X -> tr(X V) = X_ss + X_tt - 2 X_st
};
struct DenseAtom {
  SymMatrix G;  // X -> <G, X>
};

using Atom = std::variant<TraceAtom, EntryAtom, DiagAtom, EdgeQuadAtom, DenseAtom>;

struct ConstraintRow {
  Atom atom;
  double coeff = 1.0;
};

class ConstraintMap {
 public:
  ConstraintMap() = default;
  explicit ConstraintMap(int n) : n_(n) {}

  void add_trace(double coeff = 1.0);
  void add_entry(int i, int j, double coeff = 1.0);
  void add_diag(double coeff = 1.0);
  void add_edge(int s, int t, double coeff = 1.0);
  void add_dense(SymMatrix G, double coeff = 1.0);

  int n() const { return n_; }
  int rows() const { return m_; }
  const std::vector<ConstraintRow>& atoms() const { return rows_; }

  Eigen::VectorXd apply(const SymMatrix& X) const;
  SymMatrix adjoint(const Eigen::VectorXd& y) const;

  // <A(X), y> == <X, A*(y)> probe on seeded pairs; throws ConfigError.
  void check_adjoint(std::uint64_t seed = 1) const;

 private:
  int n_ = 0;
  int m_ = 0;
  std::vector<ConstraintRow> rows_;
};

// Instance of the entropy program
//   min <C,X> + mu tr(X log X)  s.t.  A(X) = b, B(X) >= d, X - eps I >= 0.
struct EntropyProblem {
  SymMatrix C;
  double mu = 1.0;
  double eps_shift = 0.0;
  ConstraintMap A;
  Eigen::VectorXd b;
  ConstraintMap B;
  Eigen::VectorXd d;

  int n() const { return C.dim(); }
  int m1() const { return A.rows(); }
  int m2() const { return B.rows(); }

  void validate() const;
};

}  // namespace entropal

#endif
