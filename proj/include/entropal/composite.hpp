#ifndef ENTROPAL_COMPOSITE_HPP
#define ENTROPAL_COMPOSITE_HPP

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "entropal/pcg.hpp"
#include "entropal/prox.hpp"

namespace entropal {

// min_x f(Ax - b) + h(Bx - c) with f, h given through their prox oracles.
// A and B are dense maps; either block may have zero rows.
struct CompositeProblem {
  Eigen::MatrixXd A;  // m1 x n
  Eigen::MatrixXd B;  // m2 x n
  Eigen::VectorXd b;  // m1
  Eigen::VectorXd c;  // m2
  std::shared_ptr<const ProxOracle> f;
  std::shared_ptr<const ProxOracle> h;

  int n() const { return static_cast<int>(std::max(A.cols(), B.cols())); }
  int m1() const { return static_cast<int>(A.rows()); }
  int m2() const { return static_cast<int>(B.rows()); }

  // Dimension checks plus an adjoint-consistency probe on seeded pairs.
  void validate() const;

  double objective(const Eigen::VectorXd& x) const {
    return f->evaluate(A * x - b) + h->evaluate(B * x - c);
  }
};

// One evaluation of the inner objective Phi(.; u, v) at x, together with the
// quantities every caller needs again: the conjugate prox points are exactly
// the candidate next multipliers.
struct PhiEval {
  double value = 0.0;
  Eigen::VectorXd grad;
  double grad_norm = 0.0;
  Eigen::VectorXd wf, wh;        // u + sigma(Ax-b), v + sigma(Bx-c)
  Eigen::VectorXd pf, ph;        // Prox_{f/sigma}(wf/sigma), same for h
  Eigen::VectorXd u_next, v_next;  // Prox_{sigma f*}(wf), Prox_{sigma h*}(wh)
  Eigen::VectorXd x;
};

PhiEval eval_phi(const CompositeProblem& prob, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                 double sigma, bool need_grad);

double phi_value(const CompositeProblem& prob, const Eigen::VectorXd& x,
                 const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                 double sigma);

Eigen::VectorXd phi_grad(const CompositeProblem& prob, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                         double sigma);

// Surrogate duality gap for the stopping tests. The dual value anchors the
// candidate multipliers, with the off-null-space component penalized through
// the radius R = ||x|| + 1, so gap >= ||A*u+ + B*v+|| >= 0 always and the gap
// vanishes exactly at inner minimizers.
struct CompositeGap {
  double phi = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  double dual_step = 0.0;  // ||(u+,v+) - (u,v)||
};

CompositeGap composite_gap(const CompositeProblem& prob, const PhiEval& ev,
                           const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                           double sigma);

bool check_stop_A(double gap, double eps_k, double sigma);
bool check_stop_B(double gap, double delta_k, double sigma, double dual_step);
bool check_stop_Bprime(double grad_norm, double deltap_k, double sigma,
                       double dual_step);

enum class InnerCriterion { A, B, BPrime, AAndBPrime };

struct SsnConfig {
  double nu = 0.25;       // Armijo slope fraction
  double nu1 = 0.5;       // regularization scale
  double nu2 = 1e-2;      // regularization cap
  double eta_bar = 0.5;   // PCG tolerance cap
  double tau = 0.5;       // PCG forcing exponent (tolerance ||g||^{1+tau})
  double backtrack = 0.5; // line-search halving factor
  int max_iter = 200;
  int max_halvings = 60;
  int pcg_max_iter = 500;
};

struct SsnResult {
  Eigen::VectorXd x;
  PhiEval last;
  int iterations = 0;
  long long pcg_iterations = 0;
  bool hit_cap = false;
  std::vector<double> grad_norms;  // per accepted iterate, including start
};

// Semismooth Newton on grad Phi = 0. The stop callback sees every iterate
// (before the step) and returns true to terminate; it is how the ALM's
// criteria reach into the inner loop.
using SsnStopFn = std::function<bool(const PhiEval&, int)>;

SsnResult ssn_solve(const CompositeProblem& prob, const Eigen::VectorXd& x0,
                    const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                    double sigma, const SsnConfig& cfg, const SsnStopFn& stop);

// Natural residual of the KKT system, with unit-parameter conjugate proxes.
struct CompositeKkt {
  Eigen::VectorXd r1, r2, r3;
  double norm = 0.0;
};

CompositeKkt composite_kkt_residual(const CompositeProblem& prob,
                                    const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& u,
                                    const Eigen::VectorXd& v);

struct AlmConfig {
  double sigma0 = 1.0;
  double rho = 2.0;
  double sigma_cap = 1e8;
  int max_outer = 100;
  double kkt_tol = 1e-9;
  InnerCriterion criterion = InnerCriterion::AAndBPrime;
  double eps0 = 1.0, q_eps = 0.5;        // eps_k = eps0 q^k (summable)
  double delta0 = 1.0, q_delta = 0.5;    // delta_k for (B)/(B2)
  double deltap0 = 1.0, q_deltap = 0.5;  // delta'_k for (B')
  double grad_floor = 1e-13;             // absolute inner gradient floor
  SsnConfig ssn;
  int verbosity = 0;
};

struct AlmOuterRow {
  int k = 0;
  double sigma = 0.0;
  int inner_iters = 0;
  long long pcg_iters = 0;
  double gap = 0.0;
  double dual_step = 0.0;
  double grad_norm = 0.0;
  double dual_value = 0.0;
  double kkt_norm = 0.0;
};

struct AlmResult {
  Eigen::VectorXd x, u, v;
  int outer = 0;
  int inner_total = 0;
  long long pcg_total = 0;
  double kkt_norm = 0.0;
  bool converged = false;
  std::string status;
  std::vector<AlmOuterRow> history;
};

AlmResult alm_solve(const CompositeProblem& prob, const AlmConfig& cfg);
AlmResult alm_solve(const CompositeProblem& prob, const AlmConfig& cfg,
                    const Eigen::VectorXd& x0, const Eigen::VectorXd& u0,
                    const Eigen::VectorXd& v0);

}  // namespace entropal

#endif
