#include "entropal/prox.hpp"

#include <cassert>
#include <cmath>

#include "entropal/errors.hpp"

namespace entropal {

Eigen::VectorXd moreau_conjugate_prox(const ProxOracle& f,
                                      const Eigen::VectorXd& x, double sigma) {
  return x - sigma * f.prox(x / sigma, 1.0 / sigma);
}

Eigen::VectorXd conjugate_prox_jacobian_apply(const ProxOracle& f,
                                              const Eigen::VectorXd& x,
                                              double sigma,
                                              const Eigen::VectorXd& h) {
  return h - f.jacobian_apply(x / sigma, 1.0 / sigma, h);
}

double conjugate_value_at_prox(const ProxOracle& f, const Eigen::VectorXd& x,
                               double sigma) {
  Eigen::VectorXd p = f.prox(x / sigma, 1.0 / sigma);
  Eigen::VectorXd u = x - sigma * p;
  return u.dot(p) - f.evaluate(p);
}

Eigen::VectorXd prox_nonneg(const Eigen::VectorXd& v) {
  return v.cwiseMax(0.0);
}

Eigen::VectorXd prox_nonneg_jacobian_diag(const Eigen::VectorXd& v) {
  Eigen::VectorXd d(v.size());
  for (int i = 0; i < v.size(); ++i) d[i] = (v[i] > 0.0) ? 1.0 : 0.0;
  return d;
}

double entropy_scalar_prox(double m, double c, double eps_floor) {
  assert(c > 0.0);
  // Root of g(t) = e^t + c t + (c - m) in t = log x; g is increasing and
  // convex, so a bracketed Newton cannot fail.
  auto g = [&](double t) { return std::exp(t) + c * t + (c - m); };

  double thi = std::log(std::max(1.0, m + c));
  while (g(thi) <= 0.0) thi += 1.0;
  double tlo = std::min(-18.42, (m - c) / c - 1.0);
  tlo = std::min(tlo, std::log(std::max(c, 1e-300)));
  while (g(tlo) >= 0.0) tlo -= std::max(1.0, 0.5 * std::abs(tlo));

  double t = 0.5 * (tlo + thi);
  for (int it = 0; it < 200; ++it) {
    double gt = g(t);
    if (gt > 0.0)
      thi = t;
    else
      tlo = t;
    double dg = std::exp(t) + c;
    double tn = t - gt / dg;
    if (!(tn > tlo && tn < thi)) tn = 0.5 * (tlo + thi);
    double dt = std::abs(tn - t);
    t = tn;
    if (dt <= 1e-15 * std::max(1.0, std::abs(t))) break;
  }
  // Two polish steps sharpen the residual to machine level.
  for (int it = 0; it < 2; ++it) t -= g(t) / (std::exp(t) + c);
  // The mathematical root is strictly positive; keep the returned value at
  // least the smallest normal double even when exp(t) underflows.
  return std::max({eps_floor, std::exp(t), 2.2250738585072014e-308});
}

ConeProxResult entropy_cone_prox_with_eig(const SymMatrix& M, double c,
                                          double eps_floor) {
  EigenDecomposition d = sym_eigen(M);
  Eigen::VectorXd x(d.dim());
  for (int i = 0; i < d.dim(); ++i)
    x[i] = entropy_scalar_prox(d.lambda[i], c, eps_floor);
  ConeProxResult out;
  out.eig.lambda = x;  // scalar prox is monotone in m, so order is preserved
  out.eig.Q = d.Q;
  out.X = out.eig.reconstruct();
  return out;
}

SymMatrix entropy_cone_prox(const SymMatrix& M, double c, double eps_floor) {
  return entropy_cone_prox_with_eig(M, c, eps_floor).X;
}

}  // namespace entropal
