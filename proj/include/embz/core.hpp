#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace embz {

using cdouble = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Input violates a documented precondition or invariant.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed (eigensolver, out-of-range spectrum, ...).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps an angle onto [0, 2pi).
inline double wrap_angle(double k) {
  double r = std::fmod(k, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

/// Distance between two angles on the circle.
inline double circular_distance(double a, double b) {
  const double d = std::fabs(wrap_angle(a) - wrap_angle(b));
  return std::min(d, kTwoPi - d);
}

inline double frobenius_distance(const Matrix& a, const Matrix& b) {
  return (a - b).norm();
}

inline double hermiticity_defect(const Matrix& m) {
  return (m - m.adjoint()).norm();
}

/// Frobenius norm of P^2 - P.
inline double idempotency_defect(const Matrix& p) {
  return (p * p - p).norm();
}

inline bool is_projector(const Matrix& p, double tol = 1e-9) {
  return p.rows() == p.cols() && hermiticity_defect(p) <= tol &&
         idempotency_defect(p) <= tol;
}

/// Orthogonal projector onto the span of the given orthonormal columns.
inline Matrix projector_onto(const Matrix& columns) {
  return columns * columns.adjoint();
}

}  // namespace embz
