#ifndef ENTROPAL_ERRORS_HPP
#define ENTROPAL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace entropal {

// Iterative kernel failed to converge or broke down (eigensolver, PCG, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

// Argument outside the domain of a spectral function (e.g. log of a
// non-positive-definite matrix). Carries the offending smallest eigenvalue.
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& what, double lambda_min)
      : std::runtime_error(what), lambda_min_(lambda_min) {}
  double lambda_min() const { return lambda_min_; }

 private:
  double lambda_min_;
};

// Line search or inner solver stalled without meeting its target.
class StagnationError : public std::runtime_error {
 public:
  StagnationError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Invalid user-facing configuration (CLI / config file / instance file).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace entropal

#endif
