#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace aircomp {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// Invalid scenario description (bad JSON, violated config invariants).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical solve failed or could not reach its stopping criterion.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A solution violates the feasibility constraints it is evaluated against.
class ConstraintViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aircomp
