#include "entropal/composite.hpp"

#include <cmath>
#include <sstream>

#include "entropal/errors.hpp"
#include "entropal/rng.hpp"

namespace entropal {

void CompositeProblem::validate() const {
  if (A.rows() != b.size() || B.rows() != c.size())
    throw ConfigError("CompositeProblem: map/right-hand-side dimensions differ");
  if (A.rows() > 0 && B.rows() > 0 && A.cols() != B.cols())
    throw ConfigError("CompositeProblem: A and B disagree on n");
  if (!f || !h) throw ConfigError("CompositeProblem: missing prox oracle");
  Rng rng(0xad701);
  for (int k = 0; k < 4; ++k) {
    Eigen::VectorXd x = rng.normal_vector(n());
    if (m1() > 0) {
      Eigen::VectorXd uu = rng.normal_vector(m1());
      double lhs = (A * x).dot(uu);
      double rhs = x.dot(A.transpose() * uu);
      if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, std::abs(lhs)))
        throw ConfigError("CompositeProblem: A adjoint probe failed");
    }
    if (m2() > 0) {
      Eigen::VectorXd vv = rng.normal_vector(m2());
      double lhs = (B * x).dot(vv);
      double rhs = x.dot(B.transpose() * vv);
      if (std::abs(lhs - rhs) > 1e-12 * std::max(1.0, std::abs(lhs)))
        throw ConfigError("CompositeProblem: B adjoint probe failed");
    }
  }
}

PhiEval eval_phi(const CompositeProblem& prob, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                 double sigma, bool need_grad) {
  PhiEval ev;
  ev.x = x;
  ev.wf = u + sigma * (prob.A * x - prob.b);
  ev.wh = v + sigma * (prob.B * x - prob.c);
  ev.pf = prob.f->prox(ev.wf / sigma, 1.0 / sigma);
  ev.ph = prob.h->prox(ev.wh / sigma, 1.0 / sigma);
  ev.u_next = ev.wf - sigma * ev.pf;
  ev.v_next = ev.wh - sigma * ev.ph;
  // Phi through the primal envelopes:
  //   e_{f/sigma}(wf/sigma) + e_{h/sigma}(wh/sigma) - (|u|^2 + |v|^2)/(2 sigma)
  ev.value = prob.f->evaluate(ev.pf) +
             0.5 * sigma * (ev.pf - ev.wf / sigma).squaredNorm() +
             prob.h->evaluate(ev.ph) +
             0.5 * sigma * (ev.ph - ev.wh / sigma).squaredNorm() -
             (u.squaredNorm() + v.squaredNorm()) / (2.0 * sigma);
  if (need_grad) {
    ev.grad = prob.A.transpose() * ev.u_next + prob.B.transpose() * ev.v_next;
    ev.grad_norm = ev.grad.norm();
  }
  return ev;
}

double phi_value(const CompositeProblem& prob, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                 double sigma) {
  return eval_phi(prob, x, u, v, sigma, false).value;
}

Eigen::VectorXd phi_grad(const CompositeProblem& prob, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                         double sigma) {
  return eval_phi(prob, x, u, v, sigma, true).grad;
}

CompositeGap composite_gap(const CompositeProblem& prob, const PhiEval& ev,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                           double sigma) {
  CompositeGap g;
  g.phi = ev.value;
  g.dual_step = std::sqrt((ev.u_next - u).squaredNorm() +
                          (ev.v_next - v).squaredNorm());
  // Fenchel values at the prox points are finite by construction.
  double fstar = ev.u_next.dot(ev.pf) - prob.f->evaluate(ev.pf);
  double hstar = ev.v_next.dot(ev.ph) - prob.h->evaluate(ev.ph);
  Eigen::VectorXd r =
      prob.A.transpose() * ev.u_next + prob.B.transpose() * ev.v_next;
  double radius = ev.x.norm() + 1.0;
  g.dual_value = -fstar - hstar - prob.b.dot(ev.u_next) -
                 prob.c.dot(ev.v_next) - g.dual_step * g.dual_step / (2.0 * sigma) -
                 radius * r.norm();
  g.gap = g.phi - g.dual_value;
  if (g.gap < -1e-9 * std::max({1.0, std::abs(g.phi), std::abs(g.dual_value)})) {
    std::ostringstream msg;
    msg << "composite_gap: duality violation, phi = " << g.phi
        << " below dual bound " << g.dual_value;
    throw NumericalError(msg.str());
  }
  if (g.gap < 0.0) g.gap = 0.0;
  return g;
}

bool check_stop_A(double gap, double eps_k, double sigma) {
  return gap <= eps_k * eps_k / (2.0 * sigma);
}

bool check_stop_B(double gap, double delta_k, double sigma, double dual_step) {
  return gap <= delta_k * delta_k / (2.0 * sigma) * dual_step * dual_step;
}

bool check_stop_Bprime(double grad_norm, double deltap_k, double sigma,
                       double dual_step) {
  return grad_norm <= deltap_k / sigma * dual_step;
}

SsnResult ssn_solve(const CompositeProblem& prob, const Eigen::VectorXd& x0,
                    const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                    double sigma, const SsnConfig& cfg, const SsnStopFn& stop) {
  SsnResult res;
  res.x = x0;
  PhiEval ev = eval_phi(prob, res.x, u, v, sigma, true);
  res.grad_norms.push_back(ev.grad_norm);

  int j = 0;
  for (; j < cfg.max_iter; ++j) {
    if (stop(ev, j)) break;
    double g = ev.grad_norm;
    double eps_j = cfg.nu1 * std::min(cfg.nu2, g);
    double eta_j = std::min(cfg.eta_bar, std::pow(g, 1.0 + cfg.tau));
    auto apply = [&](const Eigen::VectorXd& d) -> Eigen::VectorXd {
      Eigen::VectorXd out = eps_j * d;
      if (prob.m1() > 0)
        out += sigma * (prob.A.transpose() *
                        conjugate_prox_jacobian_apply(*prob.f, ev.wf, sigma,
                                                      prob.A * d));
      if (prob.m2() > 0)
        out += sigma * (prob.B.transpose() *
                        conjugate_prox_jacobian_apply(*prob.h, ev.wh, sigma,
                                                      prob.B * d));
      return out;
    };
    PcgConfig pcfg{eta_j, cfg.pcg_max_iter};
    auto lin = pcg_solve(apply, Eigen::VectorXd(-ev.grad), pcfg,
                         Eigen::VectorXd::Zero(prob.n()).eval());
    res.pcg_iterations += lin.iterations;
    Eigen::VectorXd dir = lin.x;
    double slope = ev.grad.dot(dir);
    if (!(slope < 0.0)) {  // PCG returned a non-descent direction; fall back
      dir = -ev.grad;
      slope = -ev.grad.squaredNorm();
    }
    bool accepted = false;
    double alpha = 1.0;
    for (int m = 0; m <= cfg.max_halvings; ++m) {
      PhiEval trial = eval_phi(prob, ev.x + alpha * dir, u, v, sigma, true);
      if (trial.value <= ev.value + cfg.nu * alpha * slope) {
        ev = std::move(trial);
        accepted = true;
        break;
      }
      alpha *= cfg.backtrack;
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "ssn_solve: line search stalled after " << cfg.max_halvings
          << " halvings, |grad Phi| = " << ev.grad_norm;
      throw StagnationError(msg.str(), ev.grad_norm);
    }
    res.x = ev.x;
    res.grad_norms.push_back(ev.grad_norm);
  }
  res.hit_cap = (j == cfg.max_iter);
  res.iterations = j;
  res.last = std::move(ev);
  return res;
}

CompositeKkt composite_kkt_residual(const CompositeProblem& prob,
                                    const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& v) {
  CompositeKkt r;
  r.r1 = prob.A.transpose() * u + prob.B.transpose() * v;
  r.r2 = u - moreau_conjugate_prox(*prob.f, prob.A * x - prob.b + u, 1.0);
  r.r3 = v - moreau_conjugate_prox(*prob.h, prob.B * x - prob.c + v, 1.0);
  r.norm = std::sqrt(r.r1.squaredNorm() + r.r2.squaredNorm() +
                     r.r3.squaredNorm());
  return r;
}

AlmResult alm_solve(const CompositeProblem& prob, const AlmConfig& cfg) {
  return alm_solve(prob, cfg, Eigen::VectorXd::Zero(prob.n()),
                   Eigen::VectorXd::Zero(prob.m1()),
                   Eigen::VectorXd::Zero(prob.m2()));
}

AlmResult alm_solve(const CompositeProblem& prob, const AlmConfig& cfg,
                    const Eigen::VectorXd& x0, const Eigen::VectorXd& u0,
                    const Eigen::VectorXd& v0) {
  prob.validate();
  AlmResult res;
  res.x = x0;
  res.u = u0;
  res.v = v0;
  double sigma = cfg.sigma0;
  double eps_k = cfg.eps0, delta_k = cfg.delta0, deltap_k = cfg.deltap0;

  for (int k = 0; k < cfg.max_outer; ++k) {
    AlmOuterRow row;
    row.k = k;
    row.sigma = sigma;
    CompositeGap last_gap;
    auto stop = [&](const PhiEval& ev, int) {
      if (ev.grad_norm <= cfg.grad_floor * std::max(1.0, ev.x.norm()))
        return true;
      CompositeGap g = composite_gap(prob, ev, res.u, res.v, sigma);
      last_gap = g;
      bool a = check_stop_A(g.gap, eps_k, sigma);
      bool b = check_stop_B(g.gap, delta_k, sigma, g.dual_step);
      bool bp = check_stop_Bprime(ev.grad_norm, deltap_k, sigma, g.dual_step);
      switch (cfg.criterion) {
        case InnerCriterion::A: return a;
        case InnerCriterion::B: return b;
        case InnerCriterion::BPrime: return bp;
        case InnerCriterion::AAndBPrime: return a && bp;
      }
      return false;
    };
    SsnResult inner = ssn_solve(prob, res.x, res.u, res.v, sigma, cfg.ssn, stop);
    res.x = inner.x;
    res.u = inner.last.u_next;
    res.v = inner.last.v_next;
    res.inner_total += inner.iterations;
    res.pcg_total += inner.pcg_iterations;
    res.outer = k + 1;

    CompositeKkt kkt = composite_kkt_residual(prob, res.x, res.u, res.v);
    row.inner_iters = inner.iterations;
    row.pcg_iters = inner.pcg_iterations;
    row.gap = last_gap.gap;
    row.dual_step = last_gap.dual_step;
    row.grad_norm = inner.last.grad_norm;
    row.dual_value = last_gap.dual_value;
    row.kkt_norm = kkt.norm;
    res.history.push_back(row);
    res.kkt_norm = kkt.norm;
    if (cfg.verbosity > 0)
      std::fprintf(stderr, "[alm] k=%d sigma=%.2e inner=%d kkt=%.3e\n", k,
                   sigma, inner.iterations, kkt.norm);
    if (kkt.norm <= cfg.kkt_tol) {
      res.converged = true;
      res.status = "converged";
      return res;
    }
    sigma = std::min(sigma * cfg.rho, cfg.sigma_cap);
    eps_k *= cfg.q_eps;
    delta_k *= cfg.q_delta;
    deltap_k *= cfg.q_deltap;
  }
  res.status = "outer iteration cap reached";
  return res;
}

}  // namespace entropal
