#include "entropal/entropy_alm.hpp"

#include <cmath>
#include <sstream>

#include "entropal/errors.hpp"
#include "entropal/pcg.hpp"
#include "entropal/prox.hpp"

namespace entropal {

namespace {

double entropy_of(const Eigen::VectorXd& lambda) {
  double s = 0.0;
  for (int i = 0; i < lambda.size(); ++i) s += lambda[i] * std::log(lambda[i]);
  return s;
}

// Positive part applied on the spectrum of a decomposed matrix.
SymMatrix psd_part(const EigenDecomposition& d) {
  return d.assemble(d.lambda.cwiseMax(0.0));
}

double sq(double x) { return x * x; }

}  // namespace

double primal_objective(const EigenDecomposition& x_eig,
                        const EntropyProblem& prob) {
  if (x_eig.lambda_min() <= 0.0)
    throw DomainError("primal_objective: X not positive definite",
                      x_eig.lambda_min());
  return inner(prob.C, x_eig.reconstruct()) + prob.mu * entropy_of(x_eig.lambda);
}

double primal_objective(const SymMatrix& X, const EntropyProblem& prob) {
  EigenDecomposition d = sym_eigen(X);
  if (d.lambda_min() <= 0.0)
    throw DomainError("primal_objective: X not positive definite",
                      d.lambda_min());
  return inner(prob.C, X) + prob.mu * entropy_of(d.lambda);
}

namespace {

double dual_value_core(const EntropyProblem& prob, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& z, const SymMatrix& S) {
  SymMatrix G = prob.C;
  if (prob.m1() > 0) G = G - prob.A.adjoint(y);
  if (prob.m2() > 0) G = G - prob.B.adjoint(z);
  G = G - S;
  EigenDecomposition g_eig = sym_eigen(G);
  double tr_exp = 0.0;
  for (int i = 0; i < g_eig.dim(); ++i) {
    double expo = -(g_eig.lambda[i] + prob.mu) / prob.mu;
    if (expo > 700.0) {
      std::ostringstream msg;
      msg << "dual_objective: exponent " << expo
          << " beyond overflow guard 700; sigma or problem scaling is off";
      throw NumericalError(msg.str());
    }
    tr_exp += std::exp(expo);
  }
  double val = -prob.mu * tr_exp + prob.eps_shift * S.trace();
  if (prob.m1() > 0) val += prob.b.dot(y);
  if (prob.m2() > 0) val += z.dot(prob.d);
  return val;
}

}  // namespace

double dual_objective(const EntropyProblem& prob, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& z, const SymMatrix& S) {
  return dual_value_core(prob, y, z, S);
}

double dual_objective_anchored(const EntropyProblem& prob,
                               const Eigen::VectorXd& y,
                               const Eigen::VectorXd& z, const SymMatrix& S,
                               const EntropyMultipliers& anchor, double sigma) {
  double val = dual_value_core(prob, y, z, S);
  double dist2 = (y - anchor.y).squaredNorm() + (z - anchor.z).squaredNorm() +
                 sq((S - anchor.S).norm());
  return val - dist2 / (2.0 * sigma);
}

std::optional<AugLagEval> try_eval_aug_lagrangian(
    const EntropyProblem& prob, const SymMatrix& X, const Eigen::VectorXd& y,
    const Eigen::VectorXd& z, const SymMatrix& S, double sigma, bool need_grad,
    double pd_floor) {
  AugLagEval ev;
  ev.x_eig = sym_eigen(X);
  if (ev.x_eig.lambda_min() <= pd_floor) return std::nullopt;

  const int n = prob.n();
  ev.entropy = entropy_of(ev.x_eig.lambda);
  ev.cx = inner(prob.C, X);
  ev.value = ev.cx + prob.mu * ev.entropy;

  if (prob.m1() > 0) {
    ev.ax_minus_b = prob.A.apply(X) - prob.b;
    ev.value += 0.5 * sigma * (ev.ax_minus_b - y / sigma).squaredNorm() -
                y.squaredNorm() / (2.0 * sigma);
  } else {
    ev.ax_minus_b.resize(0);
  }
  if (prob.m2() > 0) {
    ev.bx_minus_d = prob.B.apply(X) - prob.d;
    ev.z_shift = z - sigma * ev.bx_minus_d;
    ev.value += (prox_nonneg(ev.z_shift).squaredNorm() - z.squaredNorm()) /
                (2.0 * sigma);
  } else {
    ev.bx_minus_d.resize(0);
    ev.z_shift.resize(0);
  }
  // PSD shift block: S - sigma (X - eps I)
  SymMatrix pen =
      S - SymMatrix::raw(sigma * (X.mat() -
                                  prob.eps_shift * Eigen::MatrixXd::Identity(n, n)));
  ev.pen_eig = sym_eigen(pen);
  double proj_sq = 0.0;
  for (int i = 0; i < n; ++i) proj_sq += sq(std::max(ev.pen_eig.lambda[i], 0.0));
  ev.value += (proj_sq - sq(S.norm())) / (2.0 * sigma);

  if (need_grad) {
    Eigen::VectorXd loglam(n);
    for (int i = 0; i < n; ++i) loglam[i] = std::log(ev.x_eig.lambda[i]);
    Eigen::MatrixXd g = prob.C.mat() +
                        prob.mu * ev.x_eig.assemble(loglam).mat() +
                        prob.mu * Eigen::MatrixXd::Identity(n, n);
    if (prob.m1() > 0)
      g += sigma * prob.A.adjoint(ev.ax_minus_b - y / sigma).mat();
    if (prob.m2() > 0) g -= prob.B.adjoint(prox_nonneg(ev.z_shift)).mat();
    g -= psd_part(ev.pen_eig).mat();
    ev.grad = SymMatrix::raw(std::move(g));
    ev.grad_norm = ev.grad.norm();
  }
  return ev;
}

double aug_lagrangian(const SymMatrix& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& z, const SymMatrix& S,
                      double sigma, const EntropyProblem& prob) {
  auto ev = try_eval_aug_lagrangian(prob, X, y, z, S, sigma, false);
  if (!ev)
    throw DomainError("aug_lagrangian: X not positive definite",
                      sym_eigen(X).lambda_min());
  return ev->value;
}

SymMatrix aug_lagrangian_grad(const SymMatrix& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& z, const SymMatrix& S,
                              double sigma, const EntropyProblem& prob) {
  auto ev = try_eval_aug_lagrangian(prob, X, y, z, S, sigma, true);
  if (!ev)
    throw DomainError("aug_lagrangian_grad: X not positive definite",
                      sym_eigen(X).lambda_min());
  return ev->grad;
}

SymMatrix EntropyHessian::apply(const SymMatrix& H) const {
  SymMatrix out = loewner_apply_table(x_eig, omega_log, H);
  if (prob->m1() > 0)
    out = out + SymMatrix::raw(sigma * prob->A.adjoint(prob->A.apply(H)).mat());
  if (prob->m2() > 0) {
    Eigen::VectorXd bh = prob->B.apply(H);
    out = out + SymMatrix::raw(
                    sigma * prob->B.adjoint(w_diag.cwiseProduct(bh)).mat());
  }
  out = out + SymMatrix::raw(
                  sigma * loewner_apply_table(pen_eig, omega_plus, H).mat());
  return out;
}

Eigen::MatrixXd EntropyHessian::precond_diagonal(double eps_reg) const {
  const int n = x_eig.dim();
  Eigen::MatrixXd t = omega_log;
  t.array() += eps_reg;

  // u_i[a] = Q(a,i)^2; for a set of entry atoms with squared-coefficient
  // mask M the Q-basis diagonal of A*A is (up to a dropped cross term)
  // u_i^T M u_j / 4 off the diagonal and u_i^T M u_i / 2 on it.
  Eigen::MatrixXd usq = x_eig.Q.array().square().matrix();  // column i = u_i
  auto add_block = [&](const ConstraintMap& map, const Eigen::VectorXd* mask) {
    Eigen::MatrixXd entry_mask = Eigen::MatrixXd::Zero(n, n);
    bool have_entries = false;
    int at = 0;
    for (const auto& row : map.atoms()) {
      double c2 = sigma * row.coeff * row.coeff;
      std::visit(
          [&](const auto& a) {
            using T = std::decay_t<decltype(a)>;
            if constexpr (std::is_same_v<T, TraceAtom>) {
              double w = mask ? (*mask)[at] : 1.0;
              t.diagonal().array() += w * c2;
              ++at;
            } else if constexpr (std::is_same_v<T, EntryAtom>) {
              double w = mask ? (*mask)[at] : 1.0;
              if (a.i == a.j) {
                // diagonal entry atom: exact Q-basis diagonal is cheap
                for (int i = 0; i < n; ++i)
                  t(i, i) += w * c2 * usq(a.i, i) * usq(a.i, i);
              } else {
                entry_mask(a.i, a.j) += w * c2;
                entry_mask(a.j, a.i) += w * c2;
                have_entries = true;
              }
              ++at;
            } else if constexpr (std::is_same_v<T, DiagAtom>) {
              for (int d = 0; d < n; ++d) {
                double w = mask ? (*mask)[at] : 1.0;
                for (int i = 0; i < n; ++i)
                  t(i, i) += w * c2 * usq(d, i) * usq(d, i);
                ++at;
              }
            } else if constexpr (std::is_same_v<T, EdgeQuadAtom>) {
              double w = mask ? (*mask)[at] : 1.0;
              if (w > 0.0) {
                for (int i = 0; i < n; ++i) {
                  for (int j = i; j < n; ++j) {
                    double bij_ss = x_eig.Q(a.s, i) * x_eig.Q(a.s, j);
                    double bij_tt = x_eig.Q(a.t, i) * x_eig.Q(a.t, j);
                    double bij_st = 0.5 * (x_eig.Q(a.s, i) * x_eig.Q(a.t, j) +
                                           x_eig.Q(a.t, i) * x_eig.Q(a.s, j));
                    double v = bij_ss + bij_tt - 2.0 * bij_st;
                    double norm2 = (i == j) ? 1.0 : 0.5;
                    t(i, j) += w * c2 * v * v / norm2;
                    if (i != j) t(j, i) = t(i, j);
                  }
                }
              }
              ++at;
            } else {
              double w = mask ? (*mask)[at] : 1.0;
              if (w > 0.0) {
                Eigen::MatrixXd gt =
                    x_eig.Q.transpose() * a.G.mat() * x_eig.Q;
                for (int i = 0; i < n; ++i) {
                  for (int j = i; j < n; ++j) {
                    double norm2 = (i == j) ? 1.0 : 0.5;
                    t(i, j) += w * c2 * gt(i, j) * gt(i, j) / norm2;
                    if (i != j) t(j, i) = t(i, j);
                  }
                }
              }
              ++at;
            }
          },
          row.atom);
    }
    if (have_entries) {
      Eigen::MatrixXd p = usq.transpose() * entry_mask * usq;
      for (int i = 0; i < n; ++i) {
        t(i, i) += 0.5 * p(i, i);
        for (int j = i + 1; j < n; ++j) {
          t(i, j) += 0.5 * p(i, j);
          t(j, i) = t(i, j);
        }
      }
    }
  };
  if (prob->m1() > 0) add_block(prob->A, nullptr);
  if (prob->m2() > 0) add_block(prob->B, &w_diag);
  // PSD-projection block: cheap scalar proxy (exact only in its own basis).
  double pen_mean = sigma * omega_plus.mean();
  t.array() += pen_mean;
  return t;
}

EntropyHessian make_entropy_hessian(const EntropyProblem& prob,
                                    const AugLagEval& ev, double sigma) {
  EntropyHessian h;
  h.prob = &prob;
  h.sigma = sigma;
  h.x_eig = ev.x_eig;
  h.omega_log =
      prob.mu * loewner_table(
                    ev.x_eig.lambda, [](double t) { return std::log(t); },
                    [](double t) { return 1.0 / t; });
  // Eigenvalues at the domain edge make 1/lambda astronomically large; the
  // cap keeps the operator finite (those directions are frozen either way).
  h.omega_log = h.omega_log.cwiseMin(1e300);
  h.pen_eig = ev.pen_eig;
  h.omega_plus = psd_plus_table(ev.pen_eig.lambda);
  if (prob.m2() > 0) h.w_diag = prox_nonneg_jacobian_diag(ev.z_shift);
  return h;
}

SymMatrix hessian_apply(const SymMatrix& X, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& z, const SymMatrix& S,
                        double sigma, const EntropyProblem& prob,
                        const SymMatrix& H) {
  auto ev = try_eval_aug_lagrangian(prob, X, y, z, S, sigma, false);
  if (!ev)
    throw DomainError("hessian_apply: X not positive definite",
                      sym_eigen(X).lambda_min());
  return make_entropy_hessian(prob, *ev, sigma).apply(H);
}

std::pair<bool, bool> check_A2_B2(double fk_value, double gk_value,
                                  double sigma_k, double eps_k, double delta_k,
                                  double dual_step_norm) {
  double slack =
      1e-9 * std::max({1.0, std::abs(fk_value), std::abs(gk_value)});
  if (fk_value < gk_value - slack) {
    std::ostringstream msg;
    msg << "check_A2_B2: duality violation, f_k = " << fk_value
        << " below g_k = " << gk_value;
    throw NumericalError(msg.str());
  }
  double gap = std::max(fk_value - gk_value, 0.0);
  bool a2 = gap <= sq(eps_k) / (2.0 * sigma_k);
  bool b2 = gap <= sq(delta_k) / (2.0 * sigma_k) * sq(dual_step_norm);
  return {a2, b2};
}

namespace {

KktResiduals kkt_residuals_impl(const EigenDecomposition& x_eig,
                                const Eigen::VectorXd& y,
                                const Eigen::VectorXd& z, const SymMatrix& S,
                                const EntropyProblem& prob) {
  if (x_eig.lambda_min() <= 0.0)
    throw DomainError("kkt_residuals: X not positive definite",
                      x_eig.lambda_min());
  KktResiduals r;
  const int n = prob.n();
  SymMatrix X = x_eig.reconstruct();

  double rp = 0.0;
  if (prob.m1() > 0) {
    Eigen::VectorXd axb = prob.A.apply(X) - prob.b;
    rp = axb.norm() / (1.0 + prob.b.norm());
  }
  Eigen::VectorXd bxd;
  if (prob.m2() > 0) {
    bxd = prob.B.apply(X) - prob.d;
    double neg = (bxd - prox_nonneg(bxd)).norm();
    rp = std::max(rp, neg / (1.0 + bxd.norm()));
  }
  // X - eps I against the cone, in the eigenbasis of X
  Eigen::VectorXd shift = x_eig.lambda.array() - prob.eps_shift;
  double shift_neg = shift.cwiseMin(0.0).norm();
  rp = std::max(rp, shift_neg / (1.0 + shift.norm()));
  r.RP = rp;

  Eigen::VectorXd loglam(n);
  for (int i = 0; i < n; ++i) loglam[i] = std::log(x_eig.lambda[i]);
  SymMatrix dual_mat = prob.C;
  if (prob.m1() > 0) dual_mat = dual_mat - prob.A.adjoint(y);
  if (prob.m2() > 0) dual_mat = dual_mat - prob.B.adjoint(z);
  dual_mat = dual_mat - S +
             SymMatrix::raw(prob.mu * x_eig.assemble(loglam).mat() +
                            prob.mu * Eigen::MatrixXd::Identity(n, n));
  r.RD = dual_mat.norm() / (1.0 + prob.C.norm());

  double rc = 0.0;
  if (prob.m2() > 0) {
    double num = (bxd - prox_nonneg(bxd - z)).norm();
    rc = num / (1.0 + z.norm());
  }
  SymMatrix xs = SymMatrix::raw(
      X.mat() - prob.eps_shift * Eigen::MatrixXd::Identity(n, n) - S.mat());
  SymMatrix proj = psd_project(xs);
  SymMatrix xshift = SymMatrix::raw(
      X.mat() - prob.eps_shift * Eigen::MatrixXd::Identity(n, n));
  rc = std::max(rc, (xshift - proj).norm() / (1.0 + S.norm()));
  r.RC = rc;

  r.pobj = primal_objective(x_eig, prob);
  r.dobj = dual_objective(prob, y, z, S);
  r.RG = std::abs(r.pobj - r.dobj) / (1.0 + std::abs(r.pobj) + std::abs(r.dobj));
  return r;
}

}  // namespace

KktResiduals kkt_residuals(const EigenDecomposition& x_eig,
                           const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                           const SymMatrix& S, const EntropyProblem& prob) {
  return kkt_residuals_impl(x_eig, y, z, S, prob);
}

KktResiduals kkt_residuals(const SymMatrix& X, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& z, const SymMatrix& S,
                           const EntropyProblem& prob) {
  return kkt_residuals_impl(sym_eigen(X), y, z, S, prob);
}

SsnInnerResult ssn_inner(const EntropyProblem& prob, const SymMatrix& X0,
                         const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                         const SymMatrix& S, double sigma,
                         const EntropySsnConfig& cfg,
                         const EntropyStopFn& stop) {
  SsnInnerResult res;
  auto ev0 = try_eval_aug_lagrangian(prob, X0, y, z, S, sigma, true, 0.0);
  if (!ev0)
    throw DomainError("ssn_inner: starting point not positive definite",
                      sym_eigen(X0).lambda_min());
  res.X = X0;
  AugLagEval ev = std::move(*ev0);
  res.grad_norms.push_back(ev.grad_norm);

  int j = 0;
  int flat_steps = 0;
  for (; j < cfg.max_iter; ++j) {
    if (stop(ev, j)) break;
    double g = ev.grad_norm;
    double eps_j = cfg.nu1 * std::min(cfg.nu2, g);
    // Tighter than min(eta_bar, g^{1+tau}): the relative residual is capped
    // at eta_bar as well, which the loose absolute form only implies once
    // the gradient is small.
    double eta_j =
        std::min(cfg.eta_bar * std::min(1.0, g), std::pow(g, 1.0 + cfg.tau));
    EntropyHessian hess = make_entropy_hessian(prob, ev, sigma);
    auto apply = [&](const SymMatrix& d) {
      return hess.apply(d) + SymMatrix::raw(eps_j * d.mat());
    };
    PcgConfig pcfg{eta_j, cfg.pcg_max_iter};
    PcgResult<SymMatrix> lin;
    if (cfg.spectral_preconditioner) {
      Eigen::MatrixXd inv_diag =
          hess.precond_diagonal(eps_j).array().inverse().matrix();
      auto precond = [&](const SymMatrix& r) {
        return loewner_apply_table(hess.x_eig, inv_diag, r);
      };
      lin = pcg_solve(apply, -ev.grad, pcfg, precond, SymMatrix::Zero(prob.n()));
    } else {
      lin = pcg_solve(apply, -ev.grad, pcfg, SymMatrix::Zero(prob.n()));
    }
    res.pcg_iterations += lin.iterations;
    SymMatrix dir = lin.x;
    double slope = inner(ev.grad, dir);
    if (!(slope < 0.0)) {
      dir = -ev.grad;
      slope = -sq(ev.grad_norm);
    }
    bool accepted = false;
    bool saw_domain = false;
    double prev_value = ev.value;
    double alpha = 1.0;
    for (int m = 0; m <= cfg.max_halvings; ++m) {
      SymMatrix trial = res.X + alpha * dir;
      auto trial_ev = try_eval_aug_lagrangian(prob, trial, y, z, S, sigma, true,
                                              cfg.pd_floor);
      if (!trial_ev) {
        saw_domain = true;
      } else if (trial_ev->value <= ev.value + cfg.nu * alpha * slope) {
        res.X = std::move(trial);
        ev = std::move(*trial_ev);
        accepted = true;
        break;
      }
      alpha *= cfg.backtrack;
    }
    if (!accepted) {
      if (saw_domain && j == 0) {
        // Not a single step is possible from the starting point.
        std::ostringstream msg;
        msg << "ssn_inner: line search cannot restore positive definiteness "
               "after "
            << cfg.max_halvings << " halvings, |grad L_sigma| = "
            << ev.grad_norm;
        throw StagnationError(msg.str(), ev.grad_norm);
      }
      // No direction produces a representable decrease (the iterate may sit
      // numerically on the cone boundary): solved to working precision.
      res.stalled = true;
      break;
    }
    // Same exit when accepted steps stop changing the objective.
    if (prev_value - ev.value <= 1e-15 * std::max(1.0, std::abs(ev.value))) {
      if (++flat_steps >= 3) {
        res.stalled = true;
        ++j;
        break;
      }
    } else {
      flat_steps = 0;
    }
    if (cfg.verbosity > 1)
      std::fprintf(stderr,
                   "  [ssn] j=%d grad=%.3e val=%.12e alpha=%.2e pcg=%d "
                   "pcgres=%.2e slope=%.2e lammin=%.2e\n",
                   j, ev.grad_norm, ev.value, alpha, lin.iterations,
                   lin.residual_norm, slope, ev.x_eig.lambda_min());
    res.grad_norms.push_back(ev.grad_norm);
  }
  res.hit_cap = (j == cfg.max_iter);
  res.iterations = j;
  res.eval = std::move(ev);
  return res;
}

SsnInnerResult ssn_inner_gradient_tol(const EntropyProblem& prob,
                                      const SymMatrix& X0,
                                      const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& z,
                                      const SymMatrix& S, double sigma,
                                      const EntropySsnConfig& cfg,
                                      double grad_tol) {
  return ssn_inner(prob, X0, y, z, S, sigma, cfg,
                   [grad_tol](const AugLagEval& ev, int) {
                     return ev.grad_norm <= grad_tol;
                   });
}

namespace {

struct Candidates {
  Eigen::VectorXd y, z;
  SymMatrix S;
  double dual_step = 0.0;
};

// Algorithm updates: y+ = y - sigma (A(X)-b), z+ = Pi_+(z - sigma (B(X)-d)),
// S+ = Pi_{S+}(S - sigma (X - eps I)). These are the attaining multipliers of
// the augmented-Lagrangian supremum at X.
Candidates multiplier_candidates(const EntropyProblem& prob,
                                 const AugLagEval& ev, const Eigen::VectorXd& y,
                                 const Eigen::VectorXd& z, const SymMatrix& S,
                                 double sigma) {
  Candidates c;
  c.y = (prob.m1() > 0) ? Eigen::VectorXd(y - sigma * ev.ax_minus_b)
                        : Eigen::VectorXd(0);
  c.z = (prob.m2() > 0) ? prox_nonneg(ev.z_shift) : Eigen::VectorXd(0);
  c.S = psd_part(ev.pen_eig);
  double d2 = sq((c.S - S).norm());
  if (prob.m1() > 0) d2 += (c.y - y).squaredNorm();
  if (prob.m2() > 0) d2 += (c.z - z).squaredNorm();
  c.dual_step = std::sqrt(d2);
  return c;
}

}  // namespace

EntropySolveResult alm_solve_entropy(const EntropyProblem& prob,
                                     const EntropyAlmConfig& cfg,
                                     const EntropyWarmstart* warmstart) {
  prob.validate();
  EntropySolveResult res;
  const int n = prob.n();

  SymMatrix X = SymMatrix::ScaledIdentity(
      n, std::max(1.0 / n, prob.eps_shift + 1e-3));
  Eigen::VectorXd y = Eigen::VectorXd::Zero(prob.m1());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(prob.m2());
  SymMatrix S = SymMatrix::Zero(n);
  if (warmstart) {
    // PALM can park eigenvalues essentially on the cone boundary; floor the
    // spectrum slightly inside it so the first Newton steps have room to move
    // before the iterates settle at their own (possibly tiny) scale.
    EigenDecomposition ws_eig = sym_eigen(warmstart->X);
    double floor_val = std::max(prob.eps_shift, 0.0) +
                       1e-10 * std::max(1.0, std::abs(ws_eig.lambda_max()));
    X = ws_eig.assemble(ws_eig.lambda.cwiseMax(floor_val));
    y = warmstart->y;
    z = prox_nonneg(warmstart->z);  // multipliers enter inside their cones
    S = psd_project(warmstart->S);
  }

  double sigma = cfg.sigma0;
  double eps_k = cfg.eps0, delta_k = cfg.delta0, deltap_k = cfg.deltap0;
  double grad_floor = cfg.grad_floor * (1.0 + prob.C.norm());

  for (int k = 0; k < cfg.max_outer; ++k) {
    EntropyIterRow row;
    row.k = k;
    row.sigma = sigma;
    EntropyMultipliers anchor{y, z, S};

    bool gate_met = false;
    auto stop = [&](const AugLagEval& ev, int) {
      if (ev.grad_norm <= grad_floor) return true;
      Candidates c = multiplier_candidates(prob, ev, y, z, S, sigma);
      double gk;
      try {
        gk = dual_objective_anchored(prob, c.y, c.z, c.S, anchor, sigma);
      } catch (const NumericalError&) {
        // overflow guard tripped: the candidate dual point is terrible, so
        // the gate simply is not met yet
        return false;
      }
      auto [a2, b2] =
          check_A2_B2(ev.value, gk, sigma, eps_k, delta_k, c.dual_step);
      row.gap = std::max(ev.value - gk, 0.0);
      row.dual_step = c.dual_step;
      row.a2 = a2;
      row.b2 = b2;
      gate_met = a2 && b2;
      return gate_met;
    };

    // Eigenvalues parked at the cone boundary by the previous round (possible
    // for small mu) would leave the line search no room; lift them just
    // inside. The shift is far below the KKT tolerance.
    {
      EigenDecomposition xe = sym_eigen(X);
      double lift = std::max(prob.eps_shift, 0.0) +
                    1e-12 * std::max(1.0, std::abs(xe.lambda_max()));
      if (xe.lambda_min() < lift) X = xe.assemble(xe.lambda.cwiseMax(lift));
    }
    SsnInnerResult inner;
    try {
      inner = ssn_inner(prob, X, y, z, S, sigma, cfg.ssn, stop);
    } catch (const StagnationError& err) {
      std::ostringstream msg;
      msg << err.what() << " (outer iteration " << k << ", sigma = " << sigma
          << ")";
      throw StagnationError(msg.str(), err.residual());
    }
    X = inner.X;
    Candidates c = multiplier_candidates(prob, inner.eval, y, z, S, sigma);
    y = c.y;
    z = c.z;
    S = c.S;
    res.inner_total += inner.iterations;
    res.pcg_total += inner.pcg_iterations;
    res.outer = k + 1;

    KktResiduals kkt = kkt_residuals(inner.eval.x_eig, y, z, S, prob);
    row.inner_iters = inner.iterations;
    row.pcg_iters = inner.pcg_iterations;
    row.pobj = kkt.pobj;
    row.dobj = kkt.dobj;
    row.RP = kkt.RP;
    row.RD = kkt.RD;
    row.RC = kkt.RC;
    row.RG = kkt.RG;
    res.history.push_back(row);
    res.point = KktPoint{X, y, z, S, kkt};
    if (cfg.verbosity > 0)
      std::fprintf(stderr,
                   "[alm-entropy] k=%d sigma=%.2e inner=%d pcg=%lld kkt=%.3e\n",
                   k, sigma, inner.iterations, inner.pcg_iterations, kkt.kkt());

    if (kkt.kkt() < cfg.tol) {
      res.converged = true;
      res.status = "converged";
      break;
    }
    // Advance the penalty and the summable threshold sequences only when the
    // (A2)/(B2) gate was met. When the inner solve stalls at working
    // precision first, growing sigma would only amplify the same error.
    if (gate_met || !(inner.stalled || inner.hit_cap)) {
      sigma = std::min(sigma * cfg.rho, cfg.sigma_cap);
      eps_k *= cfg.q_eps;
      delta_k *= cfg.q_delta;
      deltap_k *= cfg.q_deltap;
    }
  }
  if (!res.converged) res.status = "outer iteration cap reached";
  if (res.inner_total > 0)
    res.pcg_mean = static_cast<double>(res.pcg_total) / res.inner_total;
  return res;
}

namespace {

KktResiduals palm_residuals(const EntropyProblem& prob,
                            const EigenDecomposition& x_eig,
                            const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                            const SymMatrix& S) {
  return kkt_residuals(x_eig, y, z, S, prob);
}

}  // namespace

PalmResult palm_run(const EntropyProblem& prob, const PalmConfig& cfg) {
  prob.validate();
  const int n = prob.n();
  const double sigma = cfg.sigma;

  PalmResult res;
  SymMatrix X = SymMatrix::ScaledIdentity(
      n, std::max(1.0 / n, prob.eps_shift + 1e-3));
  Eigen::VectorXd y = Eigen::VectorXd::Zero(prob.m1());
  Eigen::VectorXd z = Eigen::VectorXd::Zero(prob.m2());
  Eigen::VectorXd u = Eigen::VectorXd::Zero(prob.m2());

  // The majorization constant is loop-invariant; one power iteration upfront.
  auto quad_op = [&](const SymMatrix& w) {
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);
    if (prob.m1() > 0) acc += sigma * prob.A.adjoint(prob.A.apply(w)).mat();
    if (prob.m2() > 0) acc += sigma * prob.B.adjoint(prob.B.apply(w)).mat();
    return SymMatrix::raw(std::move(acc));
  };
  double alpha =
      std::max(operator_lambda_max(quad_op, power_seed_sym(n)).value, 1e-8);

  EigenDecomposition x_eig = sym_eigen(X);
  int it = 0;
  for (; it < cfg.iters; ++it) {
    SymMatrix M = SymMatrix::raw(alpha * X.mat()) - quad_op(X);
    if (prob.m1() > 0)
      M = M + prob.A.adjoint(y + sigma * prob.b);
    if (prob.m2() > 0)
      M = M + prob.B.adjoint(z + sigma * (prob.d + u));
    M = M - prob.C;
    auto prox = entropy_cone_prox_with_eig(SymMatrix::raw(M.mat() / alpha),
                                           prob.mu / alpha, prob.eps_shift);
    X = prox.X;
    x_eig = prox.eig;
    if (prob.m2() > 0) {
      u = prox_nonneg(prob.B.apply(X) - prob.d - z / sigma);
      z = z - cfg.tau * sigma * (prob.B.apply(X) - u - prob.d);
    }
    if (prob.m1() > 0)
      y = y - cfg.tau * sigma * (prob.A.apply(X) - prob.b);

    if (cfg.tol > 0.0 && (it + 1) % cfg.check_every == 0) {
      KktResiduals r = palm_residuals(prob, x_eig, y, z, SymMatrix::Zero(n));
      if (cfg.verbosity > 1)
        std::fprintf(stderr, "[palm] it=%d kkt=%.3e\n", it + 1, r.kkt());
      if (r.kkt() < cfg.tol) {
        res.converged = true;
        ++it;
        break;
      }
    }
  }
  res.X = X;
  res.y = y;
  res.z = z;
  res.u = u;
  res.iterations = it;
  // Multiplier seed for the PSD block; zero whenever X >= eps I strictly.
  res.S_seed = SymMatrix::raw(
      psd_project(SymMatrix::raw(-sigma * (X.mat() -
                                           prob.eps_shift *
                                               Eigen::MatrixXd::Identity(n, n))))
          .mat());
  res.res = palm_residuals(prob, x_eig, y, z, res.S_seed);
  if (cfg.tol > 0.0 && res.res.kkt() < cfg.tol) res.converged = true;
  return res;
}

EntropyWarmstart palm_warmstart(const EntropyProblem& prob, double sigma,
                                double tau, int iters) {
  PalmConfig cfg;
  cfg.sigma = sigma;
  cfg.tau = tau;
  cfg.iters = iters;
  cfg.tol = 0.0;
  PalmResult r = palm_run(prob, cfg);
  return EntropyWarmstart{r.X, r.y, r.z, r.S_seed};
}

}  // namespace entropal
