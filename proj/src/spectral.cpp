#include "entropal/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "entropal/errors.hpp"
#include "entropal/rng.hpp"

namespace entropal {

namespace {

double offdiag_norm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  const int n = static_cast<int>(a.rows());
  for (int p = 0; p < n; ++p)
    for (int q = p + 1; q < n; ++q) s += 2.0 * a(p, q) * a(p, q);
  return std::sqrt(s);
}

// Cyclic Jacobi with accumulated rotations. Deterministic sweep order.
void jacobi_eigen(Eigen::MatrixXd& a, Eigen::MatrixXd& v) {
  const int n = static_cast<int>(a.rows());
  v = Eigen::MatrixXd::Identity(n, n);
  const double norm_w = a.norm();
  const double tol = 1e-14 * norm_w;
  const int max_sweeps = 100;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    if (offdiag_norm(a) <= tol) return;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (apq == 0.0) continue;
        double app = a(p, p), aqq = a(q, q);
        double theta = (aqq - app) / (2.0 * apq);
        double t = (theta >= 0.0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        double tau = s / (1.0 + c);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = a(q, p) = 0.0;
        for (int r = 0; r < n; ++r) {
          if (r != p && r != q) {
            double arp = a(r, p), arq = a(r, q);
            a(r, p) = a(p, r) = arp - s * (arq + tau * arp);
            a(r, q) = a(q, r) = arq + s * (arp - tau * arq);
          }
          double vrp = v(r, p), vrq = v(r, q);
          v(r, p) = vrp - s * (vrq + tau * vrp);
          v(r, q) = vrq + s * (vrp - tau * vrq);
        }
      }
    }
  }
  double res = offdiag_norm(a);
  if (res > tol) {
    std::ostringstream msg;
    msg << "sym_eigen(jacobi): no convergence after " << max_sweeps
        << " sweeps, off-diagonal residual " << res << " (target " << tol << ")";
    throw NumericalError(msg.str());
  }
}

// Householder reduction to tridiagonal form with accumulated transform.
void tridiagonalize(Eigen::MatrixXd& z, Eigen::VectorXd& d, Eigen::VectorXd& e) {
  const int n = static_cast<int>(z.rows());
  d.resize(n);
  e.resize(n);
  for (int i = n - 1; i > 0; --i) {
    int l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (int k = 0; k <= l; ++k) scale += std::abs(z(i, k));
      if (scale == 0.0) {
        e[i] = z(i, l);
      } else {
        for (int k = 0; k <= l; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        double f = z(i, l);
        double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = 0.0;
        for (int j = 0; j <= l; ++j) {
          z(j, i) = z(i, j) / h;
          g = 0.0;
          for (int k = 0; k <= j; ++k) g += z(j, k) * z(i, k);
          for (int k = j + 1; k <= l; ++k) g += z(k, j) * z(i, k);
          e[j] = g / h;
          f += e[j] * z(i, j);
        }
        double hh = f / (h + h);
        for (int j = 0; j <= l; ++j) {
          f = z(i, j);
          e[j] = g = e[j] - hh * f;
          for (int k = 0; k <= j; ++k)
            z(j, k) -= f * e[k] + g * z(i, k);
        }
      }
    } else {
      e[i] = z(i, l);
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (int i = 0; i < n; ++i) {
    int l = i - 1;
    if (d[i] != 0.0) {
      for (int j = 0; j <= l; ++j) {
        double g = 0.0;
        for (int k = 0; k <= l; ++k) g += z(i, k) * z(k, j);
        for (int k = 0; k <= l; ++k) z(k, j) -= g * z(k, i);
      }
    }
    d[i] = z(i, i);
    z(i, i) = 1.0;
    for (int j = 0; j <= l; ++j) z(j, i) = z(i, j) = 0.0;
  }
}

double hypot2(double a, double b) { return std::hypot(a, b); }

// Implicit-shift QL on the tridiagonal (d, e), rotating the columns of z.
void tridiagonal_ql(Eigen::VectorXd& d, Eigen::VectorXd& e, Eigen::MatrixXd& z) {
  const int n = static_cast<int>(d.size());
  for (int i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m != l) {
        if (iter++ == 50) {
          std::ostringstream msg;
          msg << "sym_eigen(ql): eigenvalue " << l
              << " not converged after 50 shifts, subdiagonal residual "
              << std::abs(e[l]);
          throw NumericalError(msg.str());
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = hypot2(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          double b = c * e[i];
          r = hypot2(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (int k = 0; k < n; ++k) {
            f = z(k, i + 1);
            z(k, i + 1) = s * z(k, i) + c * f;
            z(k, i) = c * z(k, i) - s * f;
          }
        }
        if (r == 0.0 && m - 1 >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

void sort_ascending(Eigen::VectorXd& lambda, Eigen::MatrixXd& q) {
  const int n = static_cast<int>(lambda.size());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return lambda[a] < lambda[b]; });
  Eigen::VectorXd ls(n);
  Eigen::MatrixXd qs(n, n);
  for (int i = 0; i < n; ++i) {
    ls[i] = lambda[idx[i]];
    qs.col(i) = q.col(idx[i]);
  }
  lambda.swap(ls);
  q.swap(qs);
}

}  // namespace

EigenDecomposition sym_eigen(const SymMatrix& W, EigEngine engine) {
  const int n = W.dim();
  EigenDecomposition out;
  if (n == 0) {
    out.lambda.resize(0);
    out.Q.resize(0, 0);
    return out;
  }
  if (engine == EigEngine::Auto)
    engine = (n <= 32) ? EigEngine::Jacobi : EigEngine::Tridiagonal;

  if (engine == EigEngine::Jacobi) {
    Eigen::MatrixXd a = W.mat();
    Eigen::MatrixXd v;
    jacobi_eigen(a, v);
    out.lambda = a.diagonal();
    out.Q = std::move(v);
  } else {
    Eigen::MatrixXd z = W.mat();
    Eigen::VectorXd d, e;
    tridiagonalize(z, d, e);
    tridiagonal_ql(d, e, z);
    out.lambda = std::move(d);
    out.Q = std::move(z);
  }
  sort_ascending(out.lambda, out.Q);
  return out;
}

SymMatrix spectral_apply(const EigenDecomposition& d,
                         const std::function<double(double)>& phi) {
  Eigen::VectorXd vals(d.dim());
  for (int i = 0; i < d.dim(); ++i) vals[i] = phi(d.lambda[i]);
  if (!vals.allFinite()) {
    std::ostringstream msg;
    msg << "spectral_apply: scalar function not finite on the spectrum"
        << " (lambda_min = " << d.lambda_min() << ")";
    throw DomainError(msg.str(), d.lambda_min());
  }
  return d.assemble(vals);
}

SymMatrix psd_project(const EigenDecomposition& d) {
  Eigen::VectorXd clipped = d.lambda.cwiseMax(0.0);
  return d.assemble(clipped);
}

SymMatrix psd_project(const SymMatrix& W) {
  return psd_project(sym_eigen(W));
}

Eigen::MatrixXd loewner_table(const Eigen::VectorXd& lambda,
                              const std::function<double(double)>& phi,
                              const std::function<double(double)>& dphi) {
  const int n = static_cast<int>(lambda.size());
  Eigen::MatrixXd omega(n, n);
  for (int i = 0; i < n; ++i) {
    omega(i, i) = dphi(lambda[i]);
    for (int j = 0; j < i; ++j) {
      double li = lambda[i], lj = lambda[j];
      double cluster = 1e-14 * std::max({1.0, std::abs(li), std::abs(lj)});
      double w = (std::abs(li - lj) <= cluster)
                     ? dphi(0.5 * (li + lj))
                     : (phi(li) - phi(lj)) / (li - lj);
      omega(i, j) = omega(j, i) = w;
    }
  }
  return omega;
}

SymMatrix loewner_apply_table(const EigenDecomposition& d,
                              const Eigen::MatrixXd& omega, const SymMatrix& H) {
  Eigen::MatrixXd ht = d.Q.transpose() * H.mat() * d.Q;
  ht.array() *= omega.array();
  return SymMatrix::raw(d.Q * ht * d.Q.transpose());
}

SymMatrix loewner_apply(const EigenDecomposition& d,
                        const std::function<double(double)>& phi,
                        const std::function<double(double)>& dphi,
                        const SymMatrix& H) {
  Eigen::MatrixXd omega = loewner_table(d.lambda, phi, dphi);
  if (!omega.allFinite()) {
    std::ostringstream msg;
    msg << "loewner_apply: divided differences not finite (lambda_min = "
        << d.lambda_min() << ")";
    throw DomainError(msg.str(), d.lambda_min());
  }
  return loewner_apply_table(d, omega, H);
}

Eigen::MatrixXd psd_plus_table(const Eigen::VectorXd& lambda) {
  const int n = static_cast<int>(lambda.size());
  Eigen::MatrixXd omega(n, n);
  auto dplus = [](double t) { return t > 0.0 ? 1.0 : 0.0; };
  for (int i = 0; i < n; ++i) {
    omega(i, i) = dplus(lambda[i]);
    for (int j = 0; j < i; ++j) {
      double li = lambda[i], lj = lambda[j];
      double cluster = 1e-14 * std::max({1.0, std::abs(li), std::abs(lj)});
      double w;
      if (std::abs(li - lj) <= cluster) {
        w = dplus(0.5 * (li + lj));
      } else {
        w = (std::max(li, 0.0) - std::max(lj, 0.0)) / (li - lj);
      }
      omega(i, j) = omega(j, i) = w;
    }
  }
  return omega;
}

SymMatrix psd_project_jacobian_apply(const EigenDecomposition& d,
                                     const SymMatrix& H) {
  return loewner_apply_table(d, psd_plus_table(d.lambda), H);
}

Eigen::VectorXd power_seed_vector(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v = rng.normal_vector(n);
  if (v.norm() == 0.0) v.setOnes();
  return v;
}

SymMatrix power_seed_sym(int n, std::uint64_t seed) {
  Rng rng(seed);
  return SymMatrix(rng.normal_matrix(n, n));
}

}  // namespace entropal
