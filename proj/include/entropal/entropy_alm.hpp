#ifndef ENTROPAL_ENTROPY_ALM_HPP
#define ENTROPAL_ENTROPY_ALM_HPP

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "entropal/entropy_problem.hpp"
#include "entropal/spectral.hpp"

namespace entropal {

struct EntropyMultipliers {
  Eigen::VectorXd y;  // equalities A(X) = b
  Eigen::VectorXd z;  // inequalities B(X) >= d, z >= 0
  SymMatrix S;        // X - eps I >= 0, S >= 0
};

// <C,X> + mu tr(X log X); throws DomainError unless X > 0.
double primal_objective(const SymMatrix& X, const EntropyProblem& prob);
double primal_objective(const EigenDecomposition& x_eig,
                        const EntropyProblem& prob);

// Plain dual value
//   <b,y> + <z,d> + eps tr(S) - mu <I, exp(-(C - A*y - B*z - S + mu I)/mu)>.
// A lower bound on the primal optimum when z >= 0 and S >= 0 (the caller is
// responsible for cone membership). Exponent eigenvalues beyond 700 signal a
// scaling pathology and raise NumericalError instead of saturating.
double dual_objective(const EntropyProblem& prob, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& z, const SymMatrix& S);

// Same value minus the proximal anchor (1/2 sigma)||X_D - X_D^k||^2; this is
// the g_k used by the inner stopping tests.
double dual_objective_anchored(const EntropyProblem& prob,
                               const Eigen::VectorXd& y,
                               const Eigen::VectorXd& z, const SymMatrix& S,
                               const EntropyMultipliers& anchor, double sigma);

// One evaluation of the augmented Lagrangian at (X; y, z, S, sigma) with the
// pieces the solver reuses: both eigendecompositions and the constraint
// images.
struct AugLagEval {
  double value = 0.0;
  SymMatrix grad;
  double grad_norm = 0.0;
  EigenDecomposition x_eig;    // of X
  double entropy = 0.0;        // tr X log X
  double cx = 0.0;             // <C, X>
  Eigen::VectorXd ax_minus_b;
  Eigen::VectorXd bx_minus_d;
  Eigen::VectorXd z_shift;     // z - sigma (B(X) - d)
  EigenDecomposition pen_eig;  // of S - sigma (X - eps I)
};

// Returns nullopt when lambda_min(X) <= pd_floor (the line search treats the
// trial as +infinity); wrappers below throw DomainError instead.
std::optional<AugLagEval> try_eval_aug_lagrangian(
    const EntropyProblem& prob, const SymMatrix& X, const Eigen::VectorXd& y,
    const Eigen::VectorXd& z, const SymMatrix& S, double sigma, bool need_grad,
    double pd_floor = 0.0);

double aug_lagrangian(const SymMatrix& X, const Eigen::VectorXd& y,
                      const Eigen::VectorXd& z, const SymMatrix& S,
                      double sigma, const EntropyProblem& prob);
SymMatrix aug_lagrangian_grad(const SymMatrix& X, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& z, const SymMatrix& S,
                              double sigma, const EntropyProblem& prob);

// Generalized Hessian context per Newton step: the Loewner operator of
// mu log at X, sigma A*A, the 0/1 diagonal block of the inequality
// projection, and one Clarke element of the PSD projection Jacobian.
struct EntropyHessian {
  const EntropyProblem* prob = nullptr;
  double sigma = 0.0;
  EigenDecomposition x_eig;
  Eigen::MatrixXd omega_log;  // table of mu*log
  EigenDecomposition pen_eig;
  Eigen::MatrixXd omega_plus;
  Eigen::VectorXd w_diag;  // inequality projection Jacobian diagonal

  SymMatrix apply(const SymMatrix& H) const;

  // Jacobi diagonal of the operator in the eigenbasis of X (the basis where
  // the log block is exactly diagonal), including the dominant part of the
  // constraint blocks. Used as the PCG preconditioner.
  Eigen::MatrixXd precond_diagonal(double eps_reg) const;
};

EntropyHessian make_entropy_hessian(const EntropyProblem& prob,
                                    const AugLagEval& ev, double sigma);

// Convenience form for tests.
SymMatrix hessian_apply(const SymMatrix& X, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& z, const SymMatrix& S,
                        double sigma, const EntropyProblem& prob,
                        const SymMatrix& H);

// (A2): f_k - g_k <= eps_k^2 / (2 sigma); (B2): f_k - g_k <=
// (delta_k^2 / 2 sigma) ||X_D+ - X_D||^2. A duality violation beyond 1e-9
// slack raises NumericalError.
std::pair<bool, bool> check_A2_B2(double fk_value, double gk_value,
                                  double sigma_k, double eps_k, double delta_k,
                                  double dual_step_norm);

struct KktResiduals {
  double RP = 0.0, RD = 0.0, RC = 0.0, RG = 0.0;
  double pobj = 0.0, dobj = 0.0;
  double kkt() const { return std::max({RP, RD, RC}); }
};

KktResiduals kkt_residuals(const SymMatrix& X, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& z, const SymMatrix& S,
                           const EntropyProblem& prob);
KktResiduals kkt_residuals(const EigenDecomposition& x_eig,
                           const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                           const SymMatrix& S, const EntropyProblem& prob);

struct KktPoint {
  SymMatrix X;
  Eigen::VectorXd y, z;
  SymMatrix S;
  KktResiduals res;
};

struct EntropySsnConfig {
  double nu = 0.25;
  double nu1 = 0.5;
  double nu2 = 1e-2;
  double eta_bar = 0.5;
  double tau = 0.5;
  double backtrack = 0.5;
  int max_iter = 100;
  int max_halvings = 60;
  int pcg_max_iter = 500;
  // Trial iterates with lambda_min at or below this are treated as +inf.
  // Strict positivity (0.0) is the right default here: for small mu the
  // subproblem minimizers legitimately carry eigenvalues far below any fixed
  // positive floor, and a floor such as 1e-13 deadlocks the line search.
  double pd_floor = 0.0;
  // Precondition the Newton systems with the exact inverse of the Loewner
  // log block (diagonal in the eigenbasis of X). Plain CG stalls once
  // mu/lambda_min stretches the spectrum over many orders of magnitude.
  bool spectral_preconditioner = true;
  int verbosity = 0;
};

struct SsnInnerResult {
  SymMatrix X;
  AugLagEval eval;
  int iterations = 0;
  long long pcg_iterations = 0;
  bool hit_cap = false;
  // The iterate is at the floating-point floor of this subproblem: steps no
  // longer change the objective. This is a completed solve, not a failure.
  bool stalled = false;
  std::vector<double> grad_norms;
};

using EntropyStopFn = std::function<bool(const AugLagEval&, int)>;

// Semismooth Newton on grad L_sigma = 0 keeping every accepted iterate
// positive definite. The stop callback drives the (A2)/(B2) gate.
SsnInnerResult ssn_inner(const EntropyProblem& prob, const SymMatrix& X0,
                         const Eigen::VectorXd& y, const Eigen::VectorXd& z,
                         const SymMatrix& S, double sigma,
                         const EntropySsnConfig& cfg, const EntropyStopFn& stop);

// Stops on plain gradient norm; used by tests probing local convergence.
SsnInnerResult ssn_inner_gradient_tol(const EntropyProblem& prob,
                                      const SymMatrix& X0,
                                      const Eigen::VectorXd& y,
                                      const Eigen::VectorXd& z,
                                      const SymMatrix& S, double sigma,
                                      const EntropySsnConfig& cfg,
                                      double grad_tol);

struct EntropyAlmConfig {
  double sigma0 = 1.0;
  double rho = 1.6;
  double sigma_cap = 1e8;
  double tol = 1e-6;  // on R_KKT = max(R_P, R_D, R_C)
  int max_outer = 100;
  double eps0 = 1.0, q_eps = 0.5;      // eps_k = 0.5^k
  double delta0 = 1.0, q_delta = 0.5;  // delta_k = 0.5^k
  double deltap0 = 1.0, q_deltap = 0.5;
  double grad_floor = 1e-12;  // absolute inner gradient floor (scaled by 1+|C|)
  EntropySsnConfig ssn;
  int verbosity = 0;
};

struct EntropyIterRow {
  int k = 0;
  double sigma = 0.0;
  int inner_iters = 0;
  long long pcg_iters = 0;
  double gap = 0.0;        // f_k - g_k at acceptance
  double dual_step = 0.0;
  bool a2 = false, b2 = false;
  double pobj = 0.0, dobj = 0.0;
  double RP = 0.0, RD = 0.0, RC = 0.0, RG = 0.0;
};

struct EntropySolveResult {
  KktPoint point;
  int outer = 0;
  int inner_total = 0;
  long long pcg_total = 0;
  double pcg_mean = 0.0;
  bool converged = false;
  std::string status;
  std::vector<EntropyIterRow> history;
};

struct EntropyWarmstart {
  SymMatrix X;
  Eigen::VectorXd y, z;
  SymMatrix S;
};

EntropySolveResult alm_solve_entropy(const EntropyProblem& prob,
                                     const EntropyAlmConfig& cfg,
                                     const EntropyWarmstart* warmstart = nullptr);

struct PalmConfig {
  double sigma = 1.0;
  double tau = 1.618;  // dual step scale in (0, 2)
  int iters = 200;
  double tol = 0.0;    // > 0 enables the R_KKT early exit
  int check_every = 50;
  int verbosity = 0;
};

struct PalmResult {
  SymMatrix X;
  Eigen::VectorXd y, z, u;
  int iterations = 0;
  bool converged = false;
  KktResiduals res;  // at the final iterate, with S = Pi_{S+}(-sigma(X-eps I))
  SymMatrix S_seed;
};

PalmResult palm_run(const EntropyProblem& prob, const PalmConfig& cfg);

EntropyWarmstart palm_warmstart(const EntropyProblem& prob, double sigma,
                                double tau, int iters);

}  // namespace entropal

#endif
