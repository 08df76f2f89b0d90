#pragma once

// Non-commutative gradient, divergence and the transport metric K_rho.
//
// For a jump set {(V_j, omega_j)}:
//   (grad A)_j = [V_j, A],  div F = sum_j [F_j, V_j*],  L_0 = div o grad,
//   M_rho acts on component j by the log-mean of (e^{omega_j/2} rho, e^{-omega_j/2} rho),
//   K_rho(A) = -div(M_rho grad A).

#include <string>
#include <vector>

#include "qms/entropy.hpp"
#include "qms/lindblad.hpp"
#include "qms/matcore.hpp"

namespace qms {

using VectorField = std::vector<Matrix>;

inline VectorField gradient(const DBGenerator& db, const Matrix& a) {
  VectorField f;
  f.reserve(db.size());
  for (const auto& j : db.jumps()) f.push_back(commutator(j.v, a));
  return f;
}

inline Matrix divergence(const DBGenerator& db, const VectorField& f) {
  require(f.size() == db.size(), Errc::index_mismatch, "vector field length differs from jump count");
  Matrix out = Matrix::Zero(db.dim(), db.dim());
  for (std::size_t j = 0; j < f.size(); ++j) out += commutator(f[j], db.jumps()[j].v.adjoint());
  return out;
}

inline cplx field_inner(const VectorField& f, const VectorField& g) {
  require(f.size() == g.size(), Errc::index_mismatch, "vector field lengths differ");
  cplx s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) s += hs_inner(f[j], g[j]);
  return s;
}

inline VectorField operator+(const VectorField& a, const VectorField& b) {
  require(a.size() == b.size(), Errc::index_mismatch, "vector field lengths differ");
  VectorField c(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) c[j] = a[j] + b[j];
  return c;
}

inline VectorField scaled(const VectorField& a, cplx s) {
  VectorField c(a.size());
  for (std::size_t j = 0; j < a.size(); ++j) c[j] = s * a[j];
  return c;
}

// Stacking of a field into one vector of length |J| n^2, and back.
inline CVector stack(const VectorField& f) {
  if (f.empty()) return CVector();
  const Eigen::Index b = f.front().size();
  CVector v(b * static_cast<Eigen::Index>(f.size()));
  for (std::size_t j = 0; j < f.size(); ++j) v.segment(j * b, b) = vectorize(f[j]);
  return v;
}

inline VectorField unstack(const CVector& v, int n, std::size_t count) {
  VectorField f(count);
  const Eigen::Index b = static_cast<Eigen::Index>(n) * n;
  for (std::size_t j = 0; j < count; ++j) f[j] = devectorize(v.segment(j * b, b), n);
  return f;
}

inline Matrix gradient_op(const DBGenerator& db) {
  const int n = db.dim(), d = n * n;
  Matrix g(static_cast<Eigen::Index>(db.size()) * d, d);
  for (std::size_t j = 0; j < db.size(); ++j) g.block(j * d, 0, d, d) = commutator_op(db.jumps()[j].v).mat;
  return g;
}

inline Matrix divergence_op(const DBGenerator& db) { return -gradient_op(db).adjoint(); }

inline SuperOperator l0_superop(const DBGenerator& db) {
  const int n = db.dim();
  Matrix g = gradient_op(db);
  return {n, n, -(g.adjoint() * g)};
}

inline void require_ergodic(const DBGenerator& db, const char* who) {
  ErgodicityReport e = ergodicity_check(db);
  require(e.ergodic, Errc::not_ergodic,
          std::string(who) + ": commutant dimension " + std::to_string(e.commutant_dim));
}

// Pseudo-inverse of a Hermitian PSD (or NSD) superoperator with a known kernel dimension.
inline Matrix hermitian_pinv(const Matrix& h, int kernel_dim, int* found_kernel = nullptr) {
  Eigensystem es = eigh(h);
  double scale = std::max(es.values.cwiseAbs().maxCoeff(), 1e-300);
  RVector d(es.values.size());
  int k = 0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (std::abs(es.values(i)) <= 1e-10 * scale) {
      d(i) = 0.0;
      ++k;
    } else {
      d(i) = 1.0 / es.values(i);
    }
  }
  if (found_kernel) *found_kernel = k;
  (void)kernel_dim;
  return from_eigen(es, d);
}

inline SuperOperator l0_pinv(const DBGenerator& db) {
  require_ergodic(db, "l0_pinv");
  const int n = db.dim();
  int k = 0;
  Matrix p = hermitian_pinv(l0_superop(db).mat, 1, &k);
  require(k == 1, Errc::not_ergodic, "L_0 kernel is not one-dimensional");
  return {n, n, p};
}

// Log-mean weights of component j in rho's eigenframe.
inline RMatrix mobility_weights(const RVector& lam, double omega) {
  const Eigen::Index n = lam.size();
  RMatrix w(n, n);
  const double a = std::exp(0.5 * omega), b = std::exp(-0.5 * omega);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index l = 0; l < n; ++l) w(k, l) = log_mean(a * lam(k), b * lam(l));
  return w;
}

inline VectorField m_rho_apply(const DBGenerator& db, const Matrix& rho, const VectorField& f) {
  require(f.size() == db.size(), Errc::index_mismatch, "vector field length differs from jump count");
  Eigensystem es = eigh(rho);
  require_strict(es.values, "M_rho needs a strict state");
  VectorField out(f.size());
  for (std::size_t j = 0; j < f.size(); ++j)
    out[j] = frame_multiply(es.vectors, mobility_weights(es.values, db.jumps()[j].omega), es.vectors, f[j]);
  return out;
}

inline VectorField m_rho_pinv_apply(const DBGenerator& db, const Matrix& rho, const VectorField& f) {
  require(f.size() == db.size(), Errc::index_mismatch, "vector field length differs from jump count");
  Eigensystem es = eigh(rho);
  require_strict(es.values, "M_rho needs a strict state");
  VectorField out(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) {
    RMatrix w = mobility_weights(es.values, db.jumps()[j].omega).cwiseInverse();
    out[j] = frame_multiply(es.vectors, w, es.vectors, f[j]);
  }
  return out;
}

// <F, M_rho^-1 F>
inline double field_action(const DBGenerator& db, const Matrix& rho, const VectorField& f) {
  return field_inner(f, m_rho_pinv_apply(db, rho, f)).real();
}

// Block-diagonal M_rho^power on stacked fields.
inline Matrix m_rho_op(const DBGenerator& db, const Matrix& rho, double power = 1.0) {
  Eigensystem es = eigh(rho);
  require_strict(es.values, "M_rho needs a strict state");
  const int n = db.dim(), d = n * n;
  Matrix q = kron(es.vectors.conjugate(), es.vectors);
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(db.size()) * d, static_cast<Eigen::Index>(db.size()) * d);
  for (std::size_t j = 0; j < db.size(); ++j) {
    RMatrix w = mobility_weights(es.values, db.jumps()[j].omega);
    if (power != 1.0) w = w.array().pow(power).matrix();
    out.block(j * d, j * d, d, d) =
        q * Eigen::Map<const RVector>(w.data(), d).cast<cplx>().asDiagonal() * q.adjoint();
  }
  return out;
}

class MetricOperator {
 public:
  MetricOperator(const DBGenerator& db, const Matrix& rho) : n_(db.dim()) {
    es_ = eigh(rho);
    require_strict(es_.values, "K_rho needs a strict state");
    const int d = n_ * n_;
    Matrix q = kron(es_.vectors.conjugate(), es_.vectors);
    k_ = Matrix::Zero(d, d);
    for (const auto& j : db.jumps()) {
      Matrix dj = q.adjoint() * commutator_op(j.v).mat;
      RMatrix w = mobility_weights(es_.values, j.omega);
      k_ += dj.adjoint() * Eigen::Map<const RVector>(w.data(), d).cast<cplx>().asDiagonal() * dj;
    }
    k_ = hermitian_part(k_);
    kp_ = hermitian_pinv(k_, 1, &kernel_);
  }

  int dim() const { return n_; }
  const Matrix& superop() const { return k_; }
  const Matrix& pinv() const { return kp_; }
  int kernel_dim() const { return kernel_; }
  bool invertible_on_traceless() const { return kernel_ == 1; }

  Matrix apply(const Matrix& a) const { return devectorize(k_ * vectorize(a), n_); }
  Matrix pinv_apply(const Matrix& a) const {
    require(invertible_on_traceless(), Errc::not_ergodic, "K_rho kernel is not span{1}");
    return devectorize(kp_ * vectorize(a), n_);
  }

 private:
  int n_;
  Eigensystem es_;
  Matrix k_, kp_;
  int kernel_ = 0;
};

inline MetricOperator k_rho(const DBGenerator& db, const Matrix& rho) { return MetricOperator(db, rho); }

inline void require_tangent(const Matrix& a) {
  double s = std::max(1.0, max_abs(a));
  require(hermiticity_error(a) <= 1e-10 * s && std::abs(a.trace()) <= 1e-10 * s, Errc::invalid_input,
          "tangent vector must be traceless Hermitian");
}

// g_rho(A, A) = <A, K_rho^+ A>
inline double metric_eval(const DBGenerator& db, const Matrix& rho, const Matrix& adot) {
  require_tangent(adot);
  MetricOperator k(db, rho);
  return hs_inner(adot, k.pinv_apply(adot)).real();
}

inline double chain_rule_residual(const DBGenerator& db, const Matrix& rho) {
  Matrix diff = log_psd(rho) - log_psd(db.sigma());
  VectorField rhs = m_rho_apply(db, rho, gradient(db, diff));
  double r = 0.0;
  for (std::size_t j = 0; j < db.size(); ++j) {
    const Jump& jp = db.jumps()[j];
    Matrix lhs = std::exp(-0.5 * jp.omega) * jp.v * rho - std::exp(0.5 * jp.omega) * rho * jp.v;
    r = std::max(r, max_abs(lhs - rhs[j]));
  }
  return r;
}

// |L^dag rho + K_rho(log rho - log sigma)|
inline double gradflow_residual(const DBGenerator& db, const Matrix& rho) {
  Matrix diff = log_psd(rho) - log_psd(db.sigma());
  Matrix k = -divergence(db, m_rho_apply(db, rho, gradient(db, diff)));
  return max_abs(db.schroedinger(rho) + k);
}

// Minimal-action field with div F = -rhodot: F = M_rho grad B, B = K_rho^+ rhodot.
inline VectorField flux_projection(const DBGenerator& db, const Matrix& rho, const Matrix& rhodot) {
  require_ergodic(db, "flux_projection");
  MetricOperator k(db, rho);
  Matrix b = k.pinv_apply(rhodot);
  return m_rho_apply(db, rho, gradient(db, b));
}

}  // namespace qms
