#pragma once

// Completely positive maps in Kraus and characteristic-matrix form.
//
// A QuantumChannel maps M_{n_in} to M_{n_out}. In trace_preserving orientation
// apply(X) = sum V X V* with V of shape n_out x n_in; in unital orientation
// apply(X) = sum V* X V with V of shape n_in x n_out. Both orientations store the
// same operators for a map and its adjoint, and both close with sum V* V = I.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qms/entropy.hpp"
#include "qms/matcore.hpp"

namespace qms {

enum class Orientation { unital, trace_preserving };

inline const char* orientation_name(Orientation o) {
  return o == Orientation::unital ? "unital" : "trace_preserving";
}

inline constexpr double kClosureTol = 1e-9;

class QuantumChannel {
 public:
  QuantumChannel() = default;
  QuantumChannel(int n_in, int n_out, std::vector<Matrix> kraus, Orientation o)
      : n_in_(n_in), n_out_(n_out), kraus_(std::move(kraus)), orientation_(o) {
    require(!kraus_.empty(), Errc::invalid_input, "channel needs at least one Kraus operator");
    const int rows = o == Orientation::trace_preserving ? n_out : n_in;
    const int cols = o == Orientation::trace_preserving ? n_in : n_out;
    for (const auto& v : kraus_)
      require(v.rows() == rows && v.cols() == cols, Errc::shape_mismatch,
              "Kraus operator shape does not match channel dimensions");
    require(closure_residual() <= kClosureTol, Errc::invalid_input,
            std::string("Kraus family does not close for orientation ") + orientation_name(o));
  }

  int n_in() const { return n_in_; }
  int n_out() const { return n_out_; }
  Orientation orientation() const { return orientation_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }

  double closure_residual() const {
    const int c = static_cast<int>(kraus_.front().cols());
    Matrix s = Matrix::Zero(c, c);
    for (const auto& v : kraus_) s += v.adjoint() * v;
    return max_abs(s - identity(c));
  }

  Matrix apply(const Matrix& x) const {
    require(x.rows() == n_in_ && x.cols() == n_in_, Errc::shape_mismatch,
            "channel input has the wrong shape");
    Matrix y = Matrix::Zero(n_out_, n_out_);
    if (orientation_ == Orientation::trace_preserving) {
      for (const auto& v : kraus_) y += v * x * v.adjoint();
    } else {
      for (const auto& v : kraus_) y += v.adjoint() * x * v;
    }
    return y;
  }

  QuantumChannel adjoint() const {
    Orientation o = orientation_ == Orientation::unital ? Orientation::trace_preserving
                                                         : Orientation::unital;
    return QuantumChannel(n_out_, n_in_, kraus_, o);
  }

  SuperOperator superop() const {
    SuperOperator s(n_in_, n_out_, Matrix::Zero(n_out_ * n_out_, n_in_ * n_in_));
    for (const auto& v : kraus_)
      s.mat += orientation_ == Orientation::trace_preserving ? sandwich(v, v.adjoint()).mat
                                                             : sandwich(v.adjoint(), v).mat;
    return s;
  }

 private:
  int n_in_ = 0;
  int n_out_ = 0;
  std::vector<Matrix> kraus_;
  Orientation orientation_ = Orientation::trace_preserving;
};

inline QuantumChannel identity_channel(int n) {
  return QuantumChannel(n, n, {identity(n)}, Orientation::trace_preserving);
}

inline QuantumChannel unitary_channel(const Matrix& u) {
  const int n = static_cast<int>(u.rows());
  return QuantumChannel(n, n, {u}, Orientation::trace_preserving);
}

// Partial trace over the first factor of C^m (x) C^n, as a trace-preserving channel.
inline QuantumChannel partial_trace_channel(int m, int n) {
  std::vector<Matrix> ks;
  for (int k = 0; k < m; ++k) {
    Matrix e = Matrix::Zero(1, m);
    e(0, k) = 1.0;
    ks.push_back(kron(e, identity(n)));
  }
  return QuantumChannel(m * n, n, ks, Orientation::trace_preserving);
}

// Gaussian Kraus family whitened so that sum V* V = I; trace-preserving orientation.
inline QuantumChannel random_cptp(int n_in, int n_out, int n_kraus, std::uint64_t seed) {
  require(n_kraus >= 1 && n_in >= 1 && n_out >= 1, Errc::invalid_input,
          "random_cptp: dimensions and Kraus count must be positive");
  require(n_kraus * n_out >= n_in, Errc::invalid_input,
          "random_cptp: need n_kraus * n_out >= n_in for a trace-preserving family");
  std::mt19937_64 gen(seed);
  std::vector<Matrix> ks;
  Matrix s = Matrix::Zero(n_in, n_in);
  for (int k = 0; k < n_kraus; ++k) {
    ks.push_back(ginibre(n_out, n_in, gen));
    s += ks.back().adjoint() * ks.back();
  }
  Matrix w = power_psd(s, -0.5);
  for (auto& v : ks) v = v * w;
  return QuantumChannel(n_in, n_out, ks, Orientation::trace_preserving);
}

inline Matrix partial_trace(const Matrix& x, int m, int n) {
  require(x.rows() == m * n && x.cols() == m * n, Errc::shape_mismatch,
          "partial_trace: matrix is not mn x mn");
  Matrix y = Matrix::Zero(n, n);
  for (int k = 0; k < m; ++k) y += x.block(k * n, k * n, n, n);
  return y;
}

// Orthonormal bases under the normalized inner product Tr[A* B]/n.

inline std::vector<Matrix> gram_schmidt(const std::vector<Matrix>& in, double tol = 1e-10) {
  std::vector<Matrix> out;
  for (const auto& v : in) {
    const double n = static_cast<double>(v.rows());
    Matrix w = v;
    for (const auto& q : out) w -= (hs_inner(q, w) / n) * q;
    for (const auto& q : out) w -= (hs_inner(q, w) / n) * q;
    double nrm = std::sqrt(hs_inner(w, w).real() / n);
    if (nrm > tol) out.push_back(w / nrm);
  }
  return out;
}

// sqrt(n) e_ij, ordered with (i,j) -> i*n + j.
inline std::vector<Matrix> matrix_unit_basis(int n) {
  std::vector<Matrix> b;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Matrix e = Matrix::Zero(n, n);
      e(i, j) = std::sqrt(static_cast<double>(n));
      b.push_back(e);
    }
  return b;
}

// Identity first, then a real diagonal completion, then off-diagonal units. Closed
// under adjoints: the adjoint of each element is again an element.
inline std::vector<Matrix> unital_basis(int n) {
  std::vector<Matrix> diag{identity(n)};
  for (int k = 0; k < n; ++k) {
    Matrix e = Matrix::Zero(n, n);
    e(k, k) = std::sqrt(static_cast<double>(n));
    diag.push_back(e);
  }
  std::vector<Matrix> b = gram_schmidt(diag);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) {
        Matrix e = Matrix::Zero(n, n);
        e(i, j) = std::sqrt(static_cast<double>(n));
        b.push_back(e);
      }
  return b;
}

inline double basis_orthonormality_error(const std::vector<Matrix>& basis, int n) {
  double err = 0.0;
  for (std::size_t a = 0; a < basis.size(); ++a)
    for (std::size_t b = 0; b < basis.size(); ++b) {
      cplx g = hs_inner(basis[a], basis[b]) / static_cast<double>(n);
      err = std::max(err, std::abs(g - (a == b ? 1.0 : 0.0)));
    }
  return err;
}

struct CharacteristicMatrix {
  std::vector<Matrix> basis;
  Matrix matrix;

  SuperOperator reconstruct() const {
    const int n = static_cast<int>(basis.front().rows());
    SuperOperator s(n, n, Matrix::Zero(n * n, n * n));
    for (std::size_t a = 0; a < basis.size(); ++a)
      for (std::size_t b = 0; b < basis.size(); ++b)
        if (matrix(a, b) != cplx(0.0))
          s.mat += matrix(a, b) * sandwich(basis[a].adjoint(), basis[b]).mat;
    return s;
  }
};

// Realignment: the superoperator of X -> A X B becomes vec(A) vec(B)^T.
inline Matrix realign(const Matrix& s, int n) {
  Matrix r(n * n, n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) r(a + n * c, d + n * b) = s(a + n * b, c + n * d);
  return r;
}

inline CharacteristicMatrix characteristic_matrix(const SuperOperator& phi,
                                                  const std::vector<Matrix>& basis) {
  const int n = phi.n_in;
  require(phi.n_out == n, Errc::shape_mismatch, "characteristic matrix needs a map on M_n");
  require(basis.size() == static_cast<std::size_t>(n * n), Errc::basis_not_orthonormal,
          "basis must have n^2 elements");
  for (const auto& f : basis)
    require(f.rows() == n && f.cols() == n, Errc::shape_mismatch, "basis element shape");
  double err = basis_orthonormality_error(basis, n);
  require(err <= 1e-9, Errc::basis_not_orthonormal,
          "basis is not orthonormal (error " + std::to_string(err) + ")");
  Matrix w(n * n, n * n), wp(n * n, n * n);
  for (int a = 0; a < n * n; ++a) {
    w.col(a) = vectorize(basis[a].adjoint());
    wp.col(a) = vectorize(basis[a].conjugate());
  }
  Matrix c = w.adjoint() * realign(phi.mat, n) * wp / static_cast<double>(n * n);
  return {basis, c};
}

inline CharacteristicMatrix characteristic_matrix(const QuantumChannel& ch,
                                                  const std::vector<Matrix>& basis) {
  return characteristic_matrix(ch.superop(), basis);
}

struct CPReport {
  bool cp = false;
  double min_eigenvalue = 0.0;
  std::vector<Matrix> kraus;  // phi(X) = sum V* X V when cp
};

// Kraus operators V = sqrt(c) sum conj(u_b) F_b from the spectrum of a PSD coefficient matrix.
inline std::vector<Matrix> kraus_from_coefficients(const Matrix& c, const std::vector<Matrix>& basis,
                                                   double rank_tol) {
  Eigensystem es = eigh(c);
  std::vector<Matrix> ks;
  const int n = static_cast<int>(basis.front().rows());
  for (Eigen::Index g = 0; g < es.values.size(); ++g) {
    if (es.values(g) <= rank_tol) continue;
    Matrix v = Matrix::Zero(n, n);
    for (std::size_t b = 0; b < basis.size(); ++b) v += std::conj(es.vectors(b, g)) * basis[b];
    ks.push_back(std::sqrt(es.values(g)) * v);
  }
  return ks;
}

inline CPReport is_completely_positive(const SuperOperator& phi) {
  CharacteristicMatrix cm = characteristic_matrix(phi, matrix_unit_basis(phi.n_in));
  CPReport r;
  RVector ev = eigh(cm.matrix).values;
  r.min_eigenvalue = ev(0);
  r.cp = ev(0) >= -1e-9;
  if (r.cp) {
    double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    r.kraus = kraus_from_coefficients(cm.matrix, cm.basis, 1e-12 * scale);
  }
  return r;
}

inline CPReport is_completely_positive(const QuantumChannel& ch) {
  return is_completely_positive(ch.superop());
}

struct SchwarzReport {
  bool pass = false;
  int trials = 0;
  double worst_min_eigenvalue = 0.0;
};

// Sampled test of Phi(K* K) >= Phi(K)* Phi(K). A necessary condition only.
inline SchwarzReport is_schwarz_sampled(const SuperOperator& phi, int trials, std::uint64_t seed) {
  const int n = phi.n_in;
  require(max_abs(phi.apply(identity(n)) - identity(phi.n_out)) <= 1e-9, Errc::not_unital,
          "Schwarz test needs a unital map");
  std::mt19937_64 gen(seed);
  SchwarzReport r;
  r.trials = trials;
  r.worst_min_eigenvalue = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Matrix k = ginibre(n, n, gen);
    Matrix pk = phi.apply(k);
    Matrix d = phi.apply(k.adjoint() * k) - pk.adjoint() * pk;
    double me = min_eigenvalue(d) / std::max(1.0, max_abs(k) * max_abs(k));
    r.worst_min_eigenvalue = std::min(r.worst_min_eigenvalue, me);
  }
  r.pass = r.worst_min_eigenvalue >= -1e-9;
  return r;
}

inline void require_trace_preserving(const QuantumChannel& ch, const char* who) {
  require(ch.orientation() == Orientation::trace_preserving, Errc::precondition_violated,
          std::string(who) + ": channel must be in trace_preserving orientation");
  require(ch.closure_residual() <= kClosureTol, Errc::precondition_violated,
          std::string(who) + ": channel is not trace preserving");
}

struct DpiResult {
  double lhs = 0.0;  // D(Phi rho || Phi sigma)
  double rhs = 0.0;  // D(rho || sigma)
  double slack = 0.0;
  bool pass = false;
};

inline DpiResult dpi_check(const QuantumChannel& ch, const Matrix& rho, const Matrix& sigma) {
  require_trace_preserving(ch, "dpi_check");
  DpiResult r;
  r.lhs = relative_entropy(ch.apply(rho), ch.apply(sigma));
  r.rhs = relative_entropy(rho, sigma);
  if (std::isinf(r.rhs)) {
    r.slack = std::numeric_limits<double>::infinity();
  } else {
    r.slack = r.rhs - r.lhs;
  }
  r.pass = r.slack >= -1e-9;
  return r;
}

// Tr[K* X^+ K] - Tr[Phi(K)* Phi(X)^+ Phi(K)] for a trace-preserving 2-positive Phi.
inline double tracial_lr_check(const QuantumChannel& ch, const Matrix& k, const Matrix& x) {
  require_trace_preserving(ch, "tracial_lr_check");
  Matrix xp = pseudo_inverse(x);
  const int n = static_cast<int>(x.rows());
  double leak = max_abs(k.adjoint() * (identity(n) - x * xp));
  require(leak <= 1e-8 * std::max(max_abs(k), 1e-300), Errc::kernel_condition_violated,
          "ker(X) is not contained in ker(K*)");
  Matrix pk = ch.apply(k);
  Matrix px = ch.apply(x);
  double lhs = (k.adjoint() * xp * k).trace().real();
  double rhs = (pk.adjoint() * pseudo_inverse(px) * pk).trace().real();
  return lhs - rhs;
}

}  // namespace qms
