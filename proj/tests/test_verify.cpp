#include "doctest.h"

#include <cmath>

#include "entropal/entropy_alm.hpp"
#include "entropal/errors.hpp"
#include "entropal/instances.hpp"
#include "entropal/rng.hpp"
#include "entropal/verify.hpp"

using namespace entropal;

TEST_CASE("fd_gradient recovers linear and quadratic gradients") {
  Rng rng(61);
  SymMatrix c(rng.normal_matrix(5, 5));
  SymMatrix x(rng.normal_matrix(5, 5));
  SymMatrix g1 = verify::fd_gradient(
      [&](const SymMatrix& w) { return inner(c, w); }, x, 1e-5);
  CHECK((g1 - c).norm() <= 1e-8 * std::max(1.0, c.norm()));

  SymMatrix g2 = verify::fd_gradient(
      [&](const SymMatrix& w) { return 0.5 * w.norm() * w.norm(); }, x, 1e-5);
  CHECK((g2 - x).norm() <= 1e-8 * std::max(1.0, x.norm()));
}

TEST_CASE("fd_gradient names the offending direction on non-finite samples") {
  SymMatrix x = SymMatrix::Identity(2);
  try {
    // finite on the diagonal probes, NaN as soon as the (0,1) entry moves
    verify::fd_gradient(
        [](const SymMatrix& w) {
          return std::log(1e-12 - std::abs(w(0, 1)));
        },
        x, 1e-5);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
  }
}

TEST_CASE("dual ascent oracle: unconstrained closed form at the origin") {
  Rng rng(62);
  EntropyProblem p;
  p.C = SymMatrix(0.4 * rng.normal_matrix(4, 4));
  p.mu = 0.9;
  p.eps_shift = 0.0;
  p.A = ConstraintMap(4);
  p.b = Eigen::VectorXd(0);
  p.B = ConstraintMap(4);
  p.d = Eigen::VectorXd(0);
  auto res = verify::dual_ascent_oracle(p, 2000);
  auto d = sym_eigen(p.C);
  double expected = 0.0;
  for (int i = 0; i < 4; ++i)
    expected -= p.mu * std::exp(-(d.lambda[i] + p.mu) / p.mu);
  CHECK(res.value == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("dual ascent oracle matches the scalar Newton solution") {
  // n=1, trace constraint: optimum y* = c + mu, value c
  double c = 0.35, mu = 1.0;
  EntropyProblem p;
  p.C = SymMatrix::ScaledIdentity(1, c);
  p.mu = mu;
  p.eps_shift = 0.0;
  p.A = ConstraintMap(1);
  p.A.add_trace();
  p.b = Eigen::VectorXd::Ones(1);
  p.B = ConstraintMap(1);
  p.d = Eigen::VectorXd(0);

  // scalar Newton on g'(y) = 1 - exp(-(c - y + mu)/mu)
  double y = 0.0;
  for (int it = 0; it < 100; ++it) {
    double expo = std::exp(-(c - y + mu) / mu);
    double grad = 1.0 - expo;
    double hess = -expo / mu;
    y -= grad / hess;
  }
  CHECK(y == doctest::Approx(c + mu).epsilon(1e-12));

  auto res = verify::dual_ascent_oracle(p, 100000);
  CHECK(res.value == doctest::Approx(c).epsilon(1e-8));
  CHECK(res.y[0] == doctest::Approx(y).epsilon(1e-4));
}

TEST_CASE("dual ascent oracle respects weak duality against the alm") {
  EntropyProblem p = gen_p0(5, 3, 1.0, 63);
  auto oracle = verify::dual_ascent_oracle(p, 100000);
  EntropyAlmConfig cfg;
  cfg.tol = 1e-8;
  auto res = alm_solve_entropy(p, cfg);
  REQUIRE(res.converged);
  CHECK(oracle.value <= res.point.res.pobj + 1e-6);
}

TEST_CASE("scalar prox bisection basics") {
  CHECK(verify::scalar_prox_bisection(2.0, 1.0, 0.1) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(verify::scalar_prox_bisection(-10.0, 1.0, 0.5) == 0.5);
}
