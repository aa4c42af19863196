#include "entropal/verify.hpp"

#include <cmath>
#include <sstream>

#include "entropal/errors.hpp"

namespace entropal::verify {

SymMatrix fd_gradient(const std::function<double(const SymMatrix&)>& fn,
                      const SymMatrix& X, double h_step) {
  const int n = X.dim();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd base = X.mat();
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      Eigen::MatrixXd pert = base;
      pert(i, j) += h_step;
      pert(j, i) = pert(i, j);
      double fp = fn(SymMatrix::raw(pert));
      pert = base;
      pert(i, j) -= h_step;
      pert(j, i) = pert(i, j);
      double fm = fn(SymMatrix::raw(pert));
      if (!std::isfinite(fp) || !std::isfinite(fm)) {
        std::ostringstream msg;
        msg << "fd_gradient: non-finite sample in direction (" << i << "," << j
            << ")";
        throw NumericalError(msg.str());
      }
      // <G, E_ij + E_ji> = 2 G_ij off the diagonal.
      double denom = (i == j) ? 2.0 * h_step : 4.0 * h_step;
      g(i, j) = g(j, i) = (fp - fm) / denom;
    }
  }
  return SymMatrix::raw(std::move(g));
}

namespace {

struct DualEval {
  double value;
  Eigen::VectorXd gy, gz;
  SymMatrix gS;
  SymMatrix Xhat;
};

// Value and gradient of the plain dual; exp and the projections are unrolled
// here on purpose (the oracle must not share the solver's operator code).
DualEval eval_dual(const EntropyProblem& prob, const Eigen::VectorXd& y,
                   const Eigen::VectorXd& z, const SymMatrix& S) {
  const int n = prob.n();
  Eigen::MatrixXd g = prob.C.mat();
  if (prob.m1() > 0) g -= prob.A.adjoint(y).mat();
  if (prob.m2() > 0) g -= prob.B.adjoint(z).mat();
  g -= S.mat();
  EigenDecomposition d = sym_eigen(SymMatrix::raw(std::move(g)));
  Eigen::VectorXd expo(n);
  double tr_exp = 0.0;
  for (int i = 0; i < n; ++i) {
    expo[i] = std::exp(std::min(-(d.lambda[i] + prob.mu) / prob.mu, 700.0));
    tr_exp += expo[i];
  }
  DualEval ev;
  ev.Xhat = SymMatrix::raw(d.Q * expo.asDiagonal() * d.Q.transpose());
  ev.value = -prob.mu * tr_exp + prob.eps_shift * S.trace();
  if (prob.m1() > 0) ev.value += prob.b.dot(y);
  if (prob.m2() > 0) ev.value += z.dot(prob.d);
  ev.gy = (prob.m1() > 0)
              ? Eigen::VectorXd(prob.b - prob.A.apply(ev.Xhat))
              : Eigen::VectorXd(0);
  ev.gz = (prob.m2() > 0)
              ? Eigen::VectorXd(prob.d - prob.B.apply(ev.Xhat))
              : Eigen::VectorXd(0);
  ev.gS = SymMatrix::raw(prob.eps_shift * Eigen::MatrixXd::Identity(n, n) -
                         ev.Xhat.mat());
  return ev;
}

SymMatrix project_psd_inline(const SymMatrix& W) {
  EigenDecomposition d = sym_eigen(W);
  Eigen::VectorXd lam = d.lambda.cwiseMax(0.0);
  return SymMatrix::raw(d.Q * lam.asDiagonal() * d.Q.transpose());
}

}  // namespace

DualAscentResult dual_ascent_oracle(const EntropyProblem& prob, int iters,
                                    const DualAscentOptions& opts) {
  prob.validate();
  const int n = prob.n();
  DualAscentResult res;
  res.y = Eigen::VectorXd::Zero(prob.m1());
  res.z = Eigen::VectorXd::Zero(prob.m2());
  res.S = SymMatrix::Zero(n);

  DualEval ev = eval_dual(prob, res.y, res.z, res.S);
  double step = opts.initial_step;
  int quiet = 0;
  const double min_step = 1e-16;

  for (int it = 0; it < iters; ++it) {
    res.iterations = it + 1;
    bool moved = false;
    while (step >= min_step) {
      Eigen::VectorXd yt = res.y + step * ev.gy;
      Eigen::VectorXd zt =
          (prob.m2() > 0)
              ? Eigen::VectorXd((res.z + step * ev.gz).cwiseMax(0.0))
              : res.z;
      SymMatrix St = project_psd_inline(
          SymMatrix::raw(res.S.mat() + step * ev.gS.mat()));
      DualEval trial = eval_dual(prob, yt, zt, St);
      if (trial.value >= ev.value - 1e-15 * std::abs(ev.value)) {
        double change = std::abs(trial.value - ev.value);
        res.y = yt;
        res.z = zt;
        res.S = St;
        bool tiny = change <= opts.value_tol * std::max(1.0, std::abs(ev.value));
        ev = trial;
        moved = true;
        step *= opts.grow;
        quiet = tiny ? quiet + 1 : 0;
        break;
      }
      step *= opts.shrink;
    }
    if (!moved) {
      // Ascent failed at the minimum step: either converged to machine
      // precision or something is wrong with the instance.
      if (quiet > 0 || it > 0) break;
      throw NumericalError(
          "dual_ascent_oracle: dual value decreasing at the minimum step");
    }
    if (quiet >= opts.patience) {
      res.converged = true;
      break;
    }
  }
  if (quiet >= opts.patience) res.converged = true;
  res.value = ev.value;
  return res;
}

double scalar_prox_bisection(double m, double c, double eps_floor) {
  auto h = [&](double x) { return x - m + c * (1.0 + std::log(x)); };
  double lo = 1e-300, hi = std::max(1.0, m + c);
  while (h(hi) <= 0.0) hi *= 2.0;
  // h(lo) < 0 always: c log(1e-300) dominates
  for (int it = 0; it < 2000; ++it) {
    double mid = 0.5 * (lo + hi);
    if (h(mid) > 0.0)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 1e-13 * std::max(1.0, std::abs(hi))) break;
  }
  return std::max(eps_floor, 0.5 * (lo + hi));
}

}  // namespace entropal::verify
