#pragma once

// Scalar two-variable kernels used by eigenframe multipliers.

#include <algorithm>
#include <cmath>

#include "qms/matcore.hpp"

namespace qms {

inline bool coincident(double x, double y) {
  return std::abs(x - y) < kDegeneracyTol * std::max(std::abs(x), std::abs(y));
}

// (x - y) / (log x - log y), with value x on the diagonal and 0 if either argument is 0.
inline double log_mean(double x, double y) {
  if (x <= 0.0 || y <= 0.0) return 0.0;
  if (coincident(x, y)) return 0.5 * (x + y);
  if (x < y) std::swap(x, y);
  double d = x - y;
  return d / std::log1p(d / y);
}

// (log x - log y) / (x - y), with value 1/x on the diagonal.
inline double log_divided(double x, double y) {
  if (coincident(x, y)) return 2.0 / (x + y);
  if (x < y) std::swap(x, y);
  double d = x - y;
  return std::log1p(d / y) / d;
}

// d/dx of log_mean(x, y).
inline double log_mean_dx(double x, double y) {
  double r = x / y;
  double l = std::log(r);
  if (std::abs(l) < 1e-4) {
    // series in l of (dg/dl) e^{-l} with g(l) = (e^l - 1)/l
    double dg = 0.5 + l / 3.0 + l * l / 8.0 + l * l * l / 30.0;
    return dg * std::exp(-l);
  }
  return (l - (r - 1.0) / r) / (l * l);
}

// Eigenframe Hadamard multiplier: K -> U (W .* (U* K V)) V*.
inline Matrix frame_multiply(const Matrix& u, const RMatrix& w, const Matrix& v, const Matrix& k) {
  Matrix kh = u.adjoint() * k * v;
  return u * (kh.array() * w.cast<cplx>().array()).matrix() * v.adjoint();
}

}  // namespace qms
