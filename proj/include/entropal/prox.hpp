#ifndef ENTROPAL_PROX_HPP
#define ENTROPAL_PROX_HPP

#include <limits>
#include <memory>

#include <Eigen/Core>

#include "entropal/spectral.hpp"
#include "entropal/sym_matrix.hpp"

namespace entropal {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// A proper closed convex function r together with its proximal machinery.
// prox(x, sigma) is Prox_{sigma r}(x), envelope(x, sigma) the Moreau envelope
// e_{sigma r}(x), and jacobian_apply one element of the Clarke generalized
// Jacobian of the prox applied to h (tie rules are fixed per oracle so runs
// are deterministic).
class ProxOracle {
 public:
  virtual ~ProxOracle() = default;

  virtual double evaluate(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd prox(const Eigen::VectorXd& x, double sigma) const = 0;
  virtual Eigen::VectorXd jacobian_apply(const Eigen::VectorXd& x, double sigma,
                                         const Eigen::VectorXd& h) const = 0;

  virtual double envelope(const Eigen::VectorXd& x, double sigma) const {
    Eigen::VectorXd p = prox(x, sigma);
    return evaluate(p) + (p - x).squaredNorm() / (2.0 * sigma);
  }
};

// Indicator of the single point {a}.
class PointIndicator : public ProxOracle {
 public:
  explicit PointIndicator(Eigen::VectorXd a) : a_(std::move(a)) {}
  double evaluate(const Eigen::VectorXd& x) const override {
    double slack = 1e-9 * std::max(1.0, x.norm());
    return (x - a_).norm() <= slack ? 0.0 : kInf;
  }
  Eigen::VectorXd prox(const Eigen::VectorXd&, double) const override {
    return a_;
  }
  Eigen::VectorXd jacobian_apply(const Eigen::VectorXd&, double,
                                 const Eigen::VectorXd& h) const override {
    return Eigen::VectorXd::Zero(h.size());
  }

 private:
  Eigen::VectorXd a_;
};

// (1/2) ||x - a||^2.
class QuadraticDistance : public ProxOracle {
 public:
  explicit QuadraticDistance(Eigen::VectorXd a) : a_(std::move(a)) {}
  double evaluate(const Eigen::VectorXd& x) const override {
    return 0.5 * (x - a_).squaredNorm();
  }
  Eigen::VectorXd prox(const Eigen::VectorXd& x, double sigma) const override {
    return (x + sigma * a_) / (1.0 + sigma);
  }
  Eigen::VectorXd jacobian_apply(const Eigen::VectorXd&, double sigma,
                                 const Eigen::VectorXd& h) const override {
    return h / (1.0 + sigma);
  }

 private:
  Eigen::VectorXd a_;
};

// lambda * ||x||_1. Jacobian tie rule: 0 at the kink.
class L1Norm : public ProxOracle {
 public:
  explicit L1Norm(double lambda) : lambda_(lambda) {}
  double evaluate(const Eigen::VectorXd& x) const override {
    return lambda_ * x.lpNorm<1>();
  }
  Eigen::VectorXd prox(const Eigen::VectorXd& x, double sigma) const override {
    double t = sigma * lambda_;
    return x.unaryExpr([t](double v) {
      return v > t ? v - t : (v < -t ? v + t : 0.0);
    });
  }
  Eigen::VectorXd jacobian_apply(const Eigen::VectorXd& x, double sigma,
                                 const Eigen::VectorXd& h) const override {
    double t = sigma * lambda_;
    Eigen::VectorXd out(h.size());
    for (int i = 0; i < h.size(); ++i)
      out[i] = (std::abs(x[i]) > t) ? h[i] : 0.0;
    return out;
  }

 private:
  double lambda_;
};

// Indicator of the box [lo, hi] (componentwise). Jacobian is 1 strictly
// inside, 0 at or outside the boundary.
class BoxIndicator : public ProxOracle {
 public:
  BoxIndicator(Eigen::VectorXd lo, Eigen::VectorXd hi)
      : lo_(std::move(lo)), hi_(std::move(hi)) {}
  double evaluate(const Eigen::VectorXd& x) const override {
    double slack = 1e-9 * std::max(1.0, x.norm());
    for (int i = 0; i < x.size(); ++i)
      if (x[i] < lo_[i] - slack || x[i] > hi_[i] + slack) return kInf;
    return 0.0;
  }
  Eigen::VectorXd prox(const Eigen::VectorXd& x, double) const override {
    return x.cwiseMax(lo_).cwiseMin(hi_);
  }
  Eigen::VectorXd jacobian_apply(const Eigen::VectorXd& x, double,
                                 const Eigen::VectorXd& h) const override {
    Eigen::VectorXd out(h.size());
    for (int i = 0; i < h.size(); ++i)
      out[i] = (x[i] > lo_[i] && x[i] < hi_[i]) ? h[i] : 0.0;
    return out;
  }

 private:
  Eigen::VectorXd lo_, hi_;
};

// Indicator of the nonnegative orthant.
class NonnegIndicator : public ProxOracle {
 public:
  double evaluate(const Eigen::VectorXd& x) const override {
    double slack = 1e-9 * std::max(1.0, x.norm());
    return (x.minCoeff() >= -slack) ? 0.0 : kInf;
  }
  Eigen::VectorXd prox(const Eigen::VectorXd& x, double) const override {
    return x.cwiseMax(0.0);
  }
  Eigen::VectorXd jacobian_apply(const Eigen::VectorXd& x, double,
                                 const Eigen::VectorXd& h) const override {
    Eigen::VectorXd out(h.size());
    for (int i = 0; i < h.size(); ++i) out[i] = (x[i] > 0.0) ? h[i] : 0.0;
    return out;
  }
};

// Prox of the conjugate via the Moreau identity:
//   Prox_{sigma f*}(x) = x - sigma * Prox_{f/sigma}(x/sigma).
Eigen::VectorXd moreau_conjugate_prox(const ProxOracle& f,
                                      const Eigen::VectorXd& x, double sigma);

// Clarke element of the conjugate prox, h -> h - J h with
// J in dProx_{f/sigma}(x/sigma).
Eigen::VectorXd conjugate_prox_jacobian_apply(const ProxOracle& f,
                                              const Eigen::VectorXd& x,
                                              double sigma,
                                              const Eigen::VectorXd& h);

// f*(u) at u = Prox_{sigma f*}(x), computed through the Fenchel equality
// f(p) + f*(u) = <u, p> at the primal prox point p = Prox_{f/sigma}(x/sigma).
// Always finite: the prox output lies in dom f*.
double conjugate_value_at_prox(const ProxOracle& f, const Eigen::VectorXd& x,
                               double sigma);

// Componentwise projection onto the nonnegative orthant and the diagonal of
// its Clarke Jacobian element (0 at v_i = 0).
Eigen::VectorXd prox_nonneg(const Eigen::VectorXd& v);
Eigen::VectorXd prox_nonneg_jacobian_diag(const Eigen::VectorXd& v);

// Unique positive root of x - m + c(1 + log x) = 0 clamped at eps_floor;
// this is argmin over x >= eps_floor of (1/2)(x-m)^2 + c x log x. Solved by
// bracketed safeguarded Newton in log space to relative tolerance 1e-13.
double entropy_scalar_prox(double m, double c, double eps_floor);

struct ConeProxResult {
  SymMatrix X;
  EigenDecomposition eig;  // of X itself (shares eigenvectors with M)
};

// argmin over X >= eps_floor I of (1/2)||X - M||_F^2 + c tr(X log X),
// computed by reducing spectrally to entropy_scalar_prox per eigenvalue.
ConeProxResult entropy_cone_prox_with_eig(const SymMatrix& M, double c,
                                          double eps_floor);
SymMatrix entropy_cone_prox(const SymMatrix& M, double c, double eps_floor);

}  // namespace entropal

#endif
