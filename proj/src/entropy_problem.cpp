#include "entropal/entropy_problem.hpp"

#include <cmath>

#include "entropal/errors.hpp"
#include "entropal/rng.hpp"

namespace entropal {

void ConstraintMap::add_trace(double coeff) {
  rows_.push_back({TraceAtom{}, coeff});
  m_ += 1;
}

void ConstraintMap::add_entry(int i, int j, double coeff) {
  if (i > j) std::swap(i, j);
  if (i < 0 || j >= n_) throw ConfigError("ConstraintMap: entry index out of range");
  rows_.push_back({EntryAtom{i, j}, coeff});
  m_ += 1;
}

void ConstraintMap::add_diag(double coeff) {
  rows_.push_back({DiagAtom{}, coeff});
  m_ += n_;
}

void ConstraintMap::add_edge(int s, int t, double coeff) {
  if (s > t) std::swap(s, t);
  if (s == t) throw ConfigError("ConstraintMap: edge atoms need two distinct nodes");
  if (s < 0 || t >= n_) throw ConfigError("ConstraintMap: edge index out of range");
  rows_.push_back({EdgeQuadAtom{s, t}, coeff});
  m_ += 1;
}

void ConstraintMap::add_dense(SymMatrix G, double coeff) {
  if (G.dim() != n_) throw ConfigError("ConstraintMap: dense atom dimension mismatch");
  rows_.push_back({DenseAtom{std::move(G)}, coeff});
  m_ += 1;
}

Eigen::VectorXd ConstraintMap::apply(const SymMatrix& X) const {
  Eigen::VectorXd out(m_);
  int at = 0;
  for (const auto& row : rows_) {
    double c = row.coeff;
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, TraceAtom>) {
            out[at++] = c * X.trace();
          } else if constexpr (std::is_same_v<T, EntryAtom>) {
            out[at++] = c * X(a.i, a.j);
          } else if constexpr (std::is_same_v<T, DiagAtom>) {
            for (int i = 0; i < n_; ++i) out[at++] = c * X(i, i);
          } else if constexpr (std::is_same_v<T, EdgeQuadAtom>) {
            out[at++] = c * (X(a.s, a.s) + X(a.t, a.t) - 2.0 * X(a.s, a.t));
          } else {
            out[at++] = c * inner(a.G, X);
          }
        },
        row.atom);
  }
  return out;
}

SymMatrix ConstraintMap::adjoint(const Eigen::VectorXd& y) const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, n_);
  int at = 0;
  for (const auto& row : rows_) {
    double c = row.coeff;
    std::visit(
        [&](const auto& a) {
          using T = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<T, TraceAtom>) {
            out.diagonal().array() += c * y[at++];
          } else if constexpr (std::is_same_v<T, EntryAtom>) {
            double w = c * y[at++];
            if (a.i == a.j) {
              out(a.i, a.i) += w;
            } else {
              out(a.i, a.j) += 0.5 * w;
              out(a.j, a.i) += 0.5 * w;
            }
          } else if constexpr (std::is_same_v<T, DiagAtom>) {
            for (int i = 0; i < n_; ++i) out(i, i) += c * y[at++];
          } else if constexpr (std::is_same_v<T, EdgeQuadAtom>) {
            double w = c * y[at++];
            out(a.s, a.s) += w;
            out(a.t, a.t) += w;
            out(a.s, a.t) -= w;
            out(a.t, a.s) -= w;
          } else {
            out += (c * y[at++]) * a.G.mat();
          }
        },
        row.atom);
  }
  return SymMatrix::raw(std::move(out));
}

void ConstraintMap::check_adjoint(std::uint64_t seed) const {
  Rng rng(seed);
  for (int k = 0; k < 4; ++k) {
    SymMatrix x(rng.normal_matrix(n_, n_));
    Eigen::VectorXd y = rng.normal_vector(m_);
    double lhs = apply(x).dot(y);
    double rhs = inner(x, adjoint(y));
    if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, std::abs(lhs)))
      throw ConfigError("ConstraintMap: adjoint probe failed");
  }
}

void EntropyProblem::validate() const {
  if (mu <= 0.0) throw ConfigError("EntropyProblem: mu must be positive");
  if (A.n() != n() && m1() > 0)
    throw ConfigError("EntropyProblem: A dimension mismatch");
  if (B.n() != n() && m2() > 0)
    throw ConfigError("EntropyProblem: B dimension mismatch");
  if (A.rows() != b.size() || B.rows() != d.size())
    throw ConfigError("EntropyProblem: right-hand-side length mismatch");
  if (m1() > 0) A.check_adjoint(11);
  if (m2() > 0) B.check_adjoint(12);
}

}  // namespace entropal
