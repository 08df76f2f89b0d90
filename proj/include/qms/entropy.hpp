#pragma once

// Entropies, divergences and sigma-weighted inner products.

#include <limits>
#include <vector>

#include "qms/kernels.hpp"
#include "qms/matcore.hpp"

namespace qms {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

inline double von_neumann(const Matrix& rho) {
  RVector v = eigh(rho).values;
  double s = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) s -= xlogx(std::max(v(i), 0.0));
  return s;
}

// Tr[rho (log rho - log sigma)], or +infinity when ker sigma is not inside ker rho.
inline double relative_entropy(const Matrix& rho, const Matrix& sigma) {
  require(rho.rows() == sigma.rows() && rho.cols() == sigma.cols(), Errc::shape_mismatch,
          "relative_entropy: dimension mismatch");
  Eigensystem es = eigh(sigma);
  double scale = std::max(es.values.cwiseAbs().maxCoeff(), 1e-300);
  const Eigen::Index n = es.values.size();
  RVector logs(n);
  double leak = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (es.values(i) > 1e-10 * scale) {
      logs(i) = std::log(es.values(i));
    } else {
      logs(i) = 0.0;
      leak += es.vectors.col(i).dot(rho * es.vectors.col(i)).real();
    }
  }
  if (leak > 1e-10) return std::numeric_limits<double>::infinity();
  Matrix rh = es.vectors.adjoint() * rho * es.vectors;
  double cross = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) cross += rh(i, i).real() * logs(i);
  return -von_neumann(rho) - cross;
}

inline double bs_relative_entropy(const Matrix& rho, const Matrix& sigma) {
  require(rho.rows() == sigma.rows(), Errc::shape_mismatch, "bs_relative_entropy: dimension mismatch");
  Matrix sinv = power_psd(sigma, -1.0);
  Matrix r12 = sqrt_psd(rho);
  Matrix inner = r12 * sinv * r12;
  Matrix lg = matrix_function(inner, [](double x) { return std::log(x); }, true);
  return (rho * lg).trace().real();
}

inline double trace_distance(const Matrix& rho, const Matrix& sigma) {
  require(rho.rows() == sigma.rows(), Errc::shape_mismatch, "trace_distance: dimension mismatch");
  return eigh(rho - sigma).values.cwiseAbs().sum();
}

enum class MKind { gns, kms, bkm, discrete };

struct MWeight {
  MKind kind = MKind::bkm;
  std::vector<std::pair<double, double>> atoms;  // (s, weight), discrete only

  static MWeight gns() { return {MKind::gns, {}}; }
  static MWeight kms() { return {MKind::kms, {}}; }
  static MWeight bkm() { return {MKind::bkm, {}}; }
  static MWeight discrete(std::vector<std::pair<double, double>> a) {
    double total = 0.0;
    for (auto& [s, w] : a) {
      require(s >= 0.0 && s <= 1.0 && w > 0.0, Errc::invalid_input, "MWeight atom out of range");
      total += w;
    }
    require(std::abs(total - 1.0) <= 1e-12, Errc::invalid_input, "MWeight atoms must sum to 1");
    return {MKind::discrete, std::move(a)};
  }
};

// M_m(B) = int sigma^s B sigma^{1-s} dm(s).
inline Matrix m_apply(const Matrix& sigma, const MWeight& m, const Matrix& b) {
  Eigensystem es = eigh(sigma);
  require_strict(es.values, "m-weighted product needs a strict state");
  const Eigen::Index n = es.values.size();
  RMatrix w = RMatrix::Zero(n, n);
  const RVector& l = es.values;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      switch (m.kind) {
        case MKind::gns: w(i, j) = l(j); break;
        case MKind::kms: w(i, j) = std::sqrt(l(i) * l(j)); break;
        case MKind::bkm: w(i, j) = log_mean(l(i), l(j)); break;
        case MKind::discrete:
          for (auto [s, a] : m.atoms) w(i, j) += a * std::pow(l(i), s) * std::pow(l(j), 1.0 - s);
          break;
      }
    }
  return frame_multiply(es.vectors, w, es.vectors, b);
}

inline cplx m_inner(const Matrix& sigma, const MWeight& m, const Matrix& a, const Matrix& b) {
  return hs_inner(a, m_apply(sigma, m, b));
}

// D_rho(A) = d/ds log(rho + s A) at s = 0.
inline Matrix d_rho(const Matrix& rho, const Matrix& a) {
  Eigensystem es = eigh(rho);
  require_strict(es.values, "d_rho needs a strict state");
  const Eigen::Index n = es.values.size();
  RMatrix w(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) w(i, j) = log_divided(es.values(i), es.values(j));
  return frame_multiply(es.vectors, w, es.vectors, a);
}

inline Matrix d_rho_inverse(const Matrix& rho, const Matrix& a) {
  return m_apply(rho, MWeight::bkm(), a);
}

}  // namespace qms
