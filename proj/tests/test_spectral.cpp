#include "doctest.h"

#include <cmath>

#include <Eigen/QR>

#include "entropal/rng.hpp"
#include "entropal/spectral.hpp"

using namespace entropal;

namespace {

SymMatrix random_sym(int n, std::uint64_t seed) {
  Rng rng(seed);
  return SymMatrix(rng.normal_matrix(n, n));
}

SymMatrix random_pd(int n, std::uint64_t seed, double shift = 0.5) {
  Rng rng(seed);
  Eigen::MatrixXd g = rng.normal_matrix(n, n);
  return SymMatrix::raw(g * g.transpose() / n +
                        shift * Eigen::MatrixXd::Identity(n, n));
}

}  // namespace

TEST_CASE("sym_eigen identity and diagonal cases") {
  auto d = sym_eigen(SymMatrix::Identity(3));
  CHECK(d.lambda.isApproxToConstant(1.0, 1e-14));
  CHECK((d.Q.transpose() * d.Q - Eigen::MatrixXd::Identity(3, 3)).norm() <
        1e-13);

  Eigen::MatrixXd diag = Eigen::Vector3d(3, -1, 2).asDiagonal();
  auto d2 = sym_eigen(SymMatrix(diag));
  CHECK(d2.lambda[0] == doctest::Approx(-1).epsilon(1e-14));
  CHECK(d2.lambda[1] == doctest::Approx(2).epsilon(1e-14));
  CHECK(d2.lambda[2] == doctest::Approx(3).epsilon(1e-14));
}

TEST_CASE("sym_eigen reconstruction and orthogonality invariants") {
  for (auto engine : {EigEngine::Jacobi, EigEngine::Tridiagonal}) {
    for (int n : {1, 2, 5, 8, 23, 40, 64}) {
      SymMatrix w = random_sym(n, 100 + n);
      auto d = sym_eigen(w, engine);
      double scale = std::max(1.0, w.norm());
      CHECK((d.reconstruct() - w).norm() <= 1e-10 * scale);
      CHECK((d.Q.transpose() * d.Q - Eigen::MatrixXd::Identity(n, n)).norm() <=
            1e-12 * n);
      for (int i = 0; i + 1 < n; ++i) CHECK(d.lambda[i] <= d.lambda[i + 1]);
    }
  }
}

TEST_CASE("sym_eigen handles repeated eigenvalues and zero matrix") {
  Eigen::VectorXd vals(6);
  vals << -2, -2, 0, 0, 3, 3;
  Rng rng(7);
  Eigen::MatrixXd g = rng.normal_matrix(6, 6);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  SymMatrix w = SymMatrix(q * vals.asDiagonal() * q.transpose());
  for (auto engine : {EigEngine::Jacobi, EigEngine::Tridiagonal}) {
    auto d = sym_eigen(w, engine);
    CHECK((d.reconstruct() - w).norm() <= 1e-10 * std::max(1.0, w.norm()));
  }
  auto z = sym_eigen(SymMatrix::Zero(4));
  CHECK(z.lambda.norm() == 0.0);
}

TEST_CASE("spectral_apply trivial values") {
  auto d = sym_eigen(SymMatrix::Identity(3));
  SymMatrix logI = spectral_apply(d, [](double t) { return std::log(t); });
  CHECK(logI.norm() <= 1e-14);

  Eigen::MatrixXd m = Eigen::Vector2d(0.0, std::log(2.0)).asDiagonal();
  auto d2 = sym_eigen(SymMatrix(m));
  SymMatrix e = spectral_apply(d2, [](double t) { return std::exp(t); });
  CHECK(e(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e(1, 1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(std::abs(e(0, 1)) < 1e-14);
}

TEST_CASE("spectral_apply entropy trace equals eigenvalue sum") {
  SymMatrix x = random_pd(8, 42);
  auto d = sym_eigen(x);
  SymMatrix xlogx =
      spectral_apply(d, [](double t) { return t * std::log(t); });
  double direct = 0.0;
  for (int i = 0; i < 8; ++i) direct += d.lambda[i] * std::log(d.lambda[i]);
  CHECK(xlogx.trace() == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("spectral_apply domain error carries lambda_min") {
  Eigen::MatrixXd m = Eigen::Vector2d(1.0, -0.5).asDiagonal();
  auto d = sym_eigen(SymMatrix(m));
  try {
    spectral_apply(d, [](double t) { return std::log(t); });
    FAIL("expected DomainError");
  } catch (const DomainError& err) {
    CHECK(err.lambda_min() == doctest::Approx(-0.5).epsilon(1e-14));
  }
}

TEST_CASE("psd_project clipping, fixed point, idempotence, Moreau identity") {
  Eigen::MatrixXd m = Eigen::Vector2d(1.0, -2.0).asDiagonal();
  SymMatrix p = psd_project(SymMatrix(m));
  CHECK(p(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(p(1, 1)) < 1e-14);

  SymMatrix pd = random_pd(5, 3);
  CHECK((psd_project(pd) - pd).norm() <= 1e-12 * pd.norm());

  for (std::uint64_t s : {11u, 12u, 13u}) {
    SymMatrix w = random_sym(6, s);
    SymMatrix p1 = psd_project(w);
    CHECK((psd_project(p1) - p1).norm() <= 1e-12 * std::max(1.0, p1.norm()));
    SymMatrix pneg = psd_project(-w);
    CHECK((p1 - pneg - w).norm() <= 1e-10 * std::max(1.0, w.norm()));
    CHECK(std::abs(inner(p1, pneg)) <= 1e-10 * std::max(1.0, w.norm()));
  }
}

TEST_CASE("psd_project minimizes Frobenius distance over sampled candidates") {
  SymMatrix w = random_sym(6, 99);
  SymMatrix p = psd_project(w);
  double best = (w - p).norm();
  Rng rng(5);
  for (int k = 0; k < 200; ++k) {
    Eigen::MatrixXd g = rng.normal_matrix(6, 6);
    SymMatrix cand = SymMatrix::raw(g * g.transpose() / 6.0);
    CHECK(best <= (w - cand).norm() + 1e-12);
    // perturbations of the projection inside the cone must not be closer
    SymMatrix pert = psd_project(p + 0.1 * random_sym(6, 1000 + k));
    CHECK(best <= (w - pert).norm() + 1e-12);
  }
}

TEST_CASE("psd projection Jacobian: trivial elements") {
  SymMatrix h = random_sym(4, 8);
  auto dI = sym_eigen(SymMatrix::Identity(4));
  CHECK((psd_project_jacobian_apply(dI, h) - h).norm() <= 1e-13);
  auto dmI = sym_eigen(SymMatrix::ScaledIdentity(4, -1.0));
  CHECK(psd_project_jacobian_apply(dmI, h).norm() <= 1e-13);

  Eigen::MatrixXd m = Eigen::Vector2d(2.0, -1.0).asDiagonal();
  auto d = sym_eigen(SymMatrix(m));
  Eigen::MatrixXd omega = psd_plus_table(d.lambda);
  // eigenvalues ascending: (-1, 2); divided difference (0-2)/(-1-2) = 2/3
  CHECK(omega(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(omega(0, 0) == 0.0);
  CHECK(omega(1, 1) == 1.0);
}

TEST_CASE("psd plus table tie rule keeps zero eigenvalue pairs at zero") {
  Eigen::VectorXd lambda(3);
  lambda << 0.0, 0.0, 1.0;
  Eigen::MatrixXd omega = psd_plus_table(lambda);
  CHECK(omega(0, 1) == 0.0);
  CHECK(omega(0, 0) == 0.0);
  CHECK(omega(0, 2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("psd projection Jacobian matches finite differences at smooth points") {
  SymMatrix w = random_sym(6, 21);
  auto d = sym_eigen(w);
  CHECK(std::abs(d.lambda.cwiseAbs().minCoeff()) > 1e-6);  // smooth point
  SymMatrix h = random_sym(6, 22);
  SymMatrix jac = psd_project_jacobian_apply(d, h);
  double t = 1e-6;
  SymMatrix fd = (1.0 / (2.0 * t)) * (psd_project(w + t * h) -
                                      psd_project(w - t * h));
  CHECK((jac - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
}

TEST_CASE("loewner table and operator for log") {
  Eigen::VectorXd lambda(2);
  lambda << 1.0, std::exp(1.0);
  auto logf = [](double t) { return std::log(t); };
  auto dlogf = [](double t) { return 1.0 / t; };
  Eigen::MatrixXd omega = loewner_table(lambda, logf, dlogf);
  CHECK(omega(0, 1) == doctest::Approx(1.0 / (std::exp(1.0) - 1.0)).epsilon(1e-14));
  CHECK(omega(0, 0) == doctest::Approx(1.0).epsilon(1e-14));

  auto dI = sym_eigen(SymMatrix::Identity(3));
  SymMatrix h = random_sym(3, 31);
  CHECK((loewner_apply(dI, logf, dlogf, h) - h).norm() <= 1e-13);
}

TEST_CASE("loewner apply matches finite differences of log at PD points") {
  SymMatrix x = random_pd(6, 77);
  SymMatrix h = random_sym(6, 78);
  auto logf = [](double t) { return std::log(t); };
  auto dlogf = [](double t) { return 1.0 / t; };
  auto d = sym_eigen(x);
  SymMatrix lh = loewner_apply(d, logf, dlogf, h);
  double t = 1e-6;
  SymMatrix fplus = spectral_apply(sym_eigen(x + t * h), logf);
  SymMatrix fminus = spectral_apply(sym_eigen(x - t * h), logf);
  SymMatrix fd = (1.0 / (2.0 * t)) * (fplus - fminus);
  CHECK((lh - fd).norm() <= 1e-5 * std::max(1.0, fd.norm()));
}

TEST_CASE("loewner log domain error on non-PD spectrum") {
  Eigen::MatrixXd m = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  auto d = sym_eigen(SymMatrix(m));
  SymMatrix h = SymMatrix::Identity(2);
  CHECK_THROWS_AS(loewner_apply(
                      d, [](double t) { return std::log(t); },
                      [](double t) { return 1.0 / t; }, h),
                  DomainError);
}

TEST_CASE("operator_lambda_max closed forms") {
  auto id = [](const SymMatrix& x) { return x; };
  auto e1 = operator_lambda_max(id, power_seed_sym(4), 1000, 1e-10);
  CHECK(e1.converged);
  CHECK(e1.value == doctest::Approx(1.0).epsilon(1e-5));

  auto triple = [](const SymMatrix& x) { return 3.0 * x; };
  auto e3 = operator_lambda_max(triple, power_seed_sym(4));
  CHECK(e3.value == doctest::Approx(3.0).epsilon(1e-5));
  CHECK(e3.value >= 3.0 * (1.0 - 1e-9));  // safeguard: no underestimate

  // trace map adjoint chain: A*A(X) = tr(X) I has lambda_max = n
  int n = 5;
  auto trmap = [n](const SymMatrix& x) {
    return SymMatrix::raw(x.trace() *
                          Eigen::MatrixXd::Identity(n, n));
  };
  auto etr = operator_lambda_max(trmap, power_seed_sym(n));
  CHECK(etr.value == doctest::Approx(5.0).epsilon(1e-5));
}
