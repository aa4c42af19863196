#ifndef ENTROPAL_VERIFY_HPP
#define ENTROPAL_VERIFY_HPP

#include <functional>

#include "entropal/entropy_problem.hpp"
#include "entropal/spectral.hpp"

namespace entropal::verify {

// Desk-scale oracles for the acceptance suites. They deliberately avoid the
// solver code paths: matrix exponentials and cone projections are recomputed
// inline from sym_eigen (itself reconstruction-tested) rather than through
// the spectral/prox operators they help to check.

// Central-difference gradient of a scalar field on S^n, entry by entry over
// the upper triangle with symmetry completion. Throws NumericalError naming
// the offending direction when the field returns a non-finite sample.
SymMatrix fd_gradient(const std::function<double(const SymMatrix&)>& fn,
                      const SymMatrix& X, double h_step);

struct DualAscentResult {
  double value = 0.0;
  Eigen::VectorXd y, z;
  SymMatrix S;
  int iterations = 0;
  bool converged = false;
};

struct DualAscentOptions {
  double initial_step = 1.0;
  double shrink = 0.5;
  double grow = 1.3;
  double value_tol = 1e-12;  // relative step-to-step change
  int patience = 25;         // consecutive tiny changes before stopping
};

// Projected gradient ascent with backtracking on the plain dual
//   max <b,y> + <z,d> + eps tr(S) - mu tr exp(-(C - A*y - B*z - S + mu I)/mu)
// over z >= 0, S >= 0. Independent ground truth for small instances.
// Throws NumericalError if the value decreases at the minimum step.
DualAscentResult dual_ascent_oracle(const EntropyProblem& prob, int iters,
                                    const DualAscentOptions& opts = {});

// Bracketed bisection for the scalar entropy prox stationarity equation,
// independent of the Newton path it cross-checks.
double scalar_prox_bisection(double m, double c, double eps_floor);

}  // namespace entropal::verify

#endif
