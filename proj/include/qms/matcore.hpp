#pragma once

// Dense Hermitian linear algebra, spectral calculus and vectorization.
//
// Vectorization is column stacking: vec(A X B) = (B^T kron A) vec(X).
// The Hilbert-Schmidt inner product is the unnormalized Tr[A* B].

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <string>

#include "qms/error.hpp"

namespace qms {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kHermitianTol = 1e-8;
inline constexpr double kDegeneracyTol = 1e-12;

inline bool all_finite(const Matrix& a) {
  return a.allFinite();
}

inline double max_abs(const Matrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

inline Matrix identity(int n) { return Matrix::Identity(n, n); }

inline cplx hs_inner(const Matrix& a, const Matrix& b) {
  return (a.adjoint() * b).trace();
}

inline Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

inline Matrix hermitian_part(const Matrix& a) { return 0.5 * (a + a.adjoint()); }

inline double hermiticity_error(const Matrix& a) {
  return max_abs(a - a.adjoint());
}

class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const Matrix& a) {
    require(a.rows() == a.cols(), Errc::shape_mismatch, "Hermitian matrix must be square");
    require(all_finite(a), Errc::invalid_input, "non-finite entries");
    double scale = std::max(1.0, max_abs(a));
    require(hermiticity_error(a) <= kHermitianTol * scale, Errc::invalid_input,
            "matrix is not Hermitian");
    m_ = hermitian_part(a);
  }
  int dim() const { return static_cast<int>(m_.rows()); }
  const Matrix& mat() const { return m_; }
  operator const Matrix&() const { return m_; }

 private:
  Matrix m_;
};

struct Eigensystem {
  RVector values;  // ascending
  Matrix vectors;  // orthonormal columns
};

inline Eigensystem eigh(const Matrix& a) {
  require(a.rows() == a.cols(), Errc::shape_mismatch, "eigh needs a square matrix");
  require(all_finite(a), Errc::invalid_input, "non-finite entries");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(a));
  require(es.info() == Eigen::Success, Errc::invalid_input, "eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

inline Matrix from_eigen(const Eigensystem& es, const RVector& fvals) {
  return es.vectors * fvals.cast<cplx>().asDiagonal() * es.vectors.adjoint();
}

inline double min_eigenvalue(const Matrix& a) { return eigh(a).values(0); }

// f applied on the spectrum. With zero_extension, eigenvalues below tol (relative
// to the spectral radius) are sent to 0 instead of f.
inline Matrix matrix_function(const Matrix& a, const std::function<double(double)>& f,
                              bool zero_extension = false) {
  Eigensystem es = eigh(a);
  double scale = std::max(es.values.cwiseAbs().maxCoeff(), 1e-300);
  RVector fv(es.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) {
    double x = es.values(i);
    if (zero_extension && std::abs(x) <= 1e-12 * scale) {
      fv(i) = 0.0;
    } else {
      fv(i) = f(x);
      require(std::isfinite(fv(i)), Errc::invalid_input, "f not finite on the spectrum");
    }
  }
  return from_eigen(es, fv);
}

inline void require_strict(const RVector& vals, const char* what) {
  double scale = std::max(vals.cwiseAbs().maxCoeff(), 1e-300);
  if (vals.minCoeff() <= 1e-14 * scale || vals.minCoeff() <= 0.0)
    throw Error(Errc::singular_matrix, what);
}

inline Matrix log_psd(const Matrix& a) {
  Eigensystem es = eigh(a);
  require_strict(es.values, "log of a singular matrix");
  return from_eigen(es, es.values.array().log().matrix());
}

inline Matrix power_psd(const Matrix& a, double p) {
  Eigensystem es = eigh(a);
  if (p < 0) require_strict(es.values, "negative power of a singular matrix");
  RVector fv(es.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i) {
    double x = std::max(es.values(i), 0.0);
    fv(i) = (x == 0.0) ? (p == 0.0 ? 1.0 : 0.0) : std::pow(x, p);
  }
  return from_eigen(es, fv);
}

inline Matrix sqrt_psd(const Matrix& a) { return power_psd(a, 0.5); }

inline Matrix exp_hermitian(const Matrix& a) {
  Eigensystem es = eigh(a);
  return from_eigen(es, es.values.array().exp().matrix());
}

inline Matrix pseudo_inverse(const Matrix& a, double rank_tol = -1.0) {
  Eigensystem es = eigh(a);
  double scale = es.values.size() ? es.values.cwiseAbs().maxCoeff() : 0.0;
  if (rank_tol < 0) rank_tol = 1e-10 * scale;
  RVector fv(es.values.size());
  for (Eigen::Index i = 0; i < fv.size(); ++i)
    fv(i) = std::abs(es.values(i)) > rank_tol ? 1.0 / es.values(i) : 0.0;
  return from_eigen(es, fv);
}

class DensityMatrix {
 public:
  DensityMatrix() = default;
  explicit DensityMatrix(const Matrix& a) : h_(a) {
    Eigensystem es = eigh(h_.mat());
    require(std::abs(h_.mat().trace().real() - 1.0) <= 1e-12 * h_.dim() + 1e-12,
            Errc::invalid_input, "density matrix trace differs from 1");
    require(es.values(0) >= -1e-12, Errc::invalid_input, "density matrix has a negative eigenvalue");
    strict_ = es.values(0) > 1e-10;
  }
  // Symmetrizes, clips tiny negative eigenvalues and renormalizes.
  static DensityMatrix normalized(const Matrix& a) {
    Matrix h = hermitian_part(a);
    Eigensystem es = eigh(h);
    RVector v = es.values.cwiseMax(0.0);
    double tr = v.sum();
    require(tr > 0, Errc::invalid_input, "cannot normalize a zero matrix");
    return DensityMatrix(from_eigen(es, v / tr));
  }
  int dim() const { return h_.dim(); }
  bool strict() const { return strict_; }
  const Matrix& mat() const { return h_.mat(); }
  operator const Matrix&() const { return h_.mat(); }

 private:
  HermitianMatrix h_;
  bool strict_ = false;
};

inline void require_density(const Matrix& rho, bool strict, const char* who) {
  require(rho.rows() == rho.cols() && rho.rows() > 0, Errc::shape_mismatch,
          std::string(who) + ": density matrix must be square");
  Eigensystem es = eigh(rho);
  if (strict && es.values(0) <= 1e-10)
    throw Error(Errc::singular_matrix, std::string(who) + ": state is not strictly positive");
}

// Column-stacking vectorization.
inline CVector vectorize(const Matrix& x) {
  return Eigen::Map<const CVector>(x.data(), x.size());
}

inline Matrix devectorize(const CVector& v, int rows, int cols = -1) {
  if (cols < 0) cols = rows;
  require(v.size() == static_cast<Eigen::Index>(rows) * cols, Errc::shape_mismatch,
          "devectorize: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

inline Matrix kron(const Matrix& a, const Matrix& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

// Linear map M_{n_in} -> M_{n_out} as an n_out^2 x n_in^2 matrix on vectorized input.
struct SuperOperator {
  int n_in = 0;
  int n_out = 0;
  Matrix mat;

  SuperOperator() = default;
  SuperOperator(int nin, int nout, Matrix m) : n_in(nin), n_out(nout), mat(std::move(m)) {
    require(mat.rows() == static_cast<Eigen::Index>(n_out) * n_out &&
                mat.cols() == static_cast<Eigen::Index>(n_in) * n_in,
            Errc::shape_mismatch, "superoperator shape does not match dimensions");
  }
  explicit SuperOperator(Matrix m) {
    int ni = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m.cols()))));
    int no = static_cast<int>(std::lround(std::sqrt(static_cast<double>(m.rows()))));
    *this = SuperOperator(ni, no, std::move(m));
  }
  int dim() const { return n_in; }

  Matrix apply(const Matrix& x) const {
    require(x.rows() == n_in && x.cols() == n_in, Errc::shape_mismatch,
            "superoperator input has the wrong shape");
    return devectorize(mat * vectorize(x), n_out);
  }
  SuperOperator adjoint() const { return {n_out, n_in, mat.adjoint()}; }
  SuperOperator operator*(const SuperOperator& o) const {
    require(n_in == o.n_out, Errc::shape_mismatch, "superoperator composition");
    return {o.n_in, n_out, mat * o.mat};
  }
  SuperOperator operator+(const SuperOperator& o) const {
    require(n_in == o.n_in && n_out == o.n_out, Errc::shape_mismatch, "superoperator sum");
    return {n_in, n_out, mat + o.mat};
  }
  SuperOperator operator-(const SuperOperator& o) const {
    require(n_in == o.n_in && n_out == o.n_out, Errc::shape_mismatch, "superoperator difference");
    return {n_in, n_out, mat - o.mat};
  }
  SuperOperator operator*(cplx s) const { return {n_in, n_out, s * mat}; }

  static SuperOperator identity(int n) {
    return {n, n, Matrix::Identity(n * n, n * n)};
  }
};

// X -> A X B
inline SuperOperator sandwich(const Matrix& a, const Matrix& b) {
  return {static_cast<int>(a.cols()), static_cast<int>(a.rows()), kron(b.transpose(), a)};
}

inline SuperOperator left_mult(const Matrix& a) {
  return sandwich(a, identity(static_cast<int>(a.cols())));
}
inline SuperOperator right_mult(const Matrix& b) {
  return sandwich(identity(static_cast<int>(b.rows())), b);
}
// X -> [A, X]
inline SuperOperator commutator_op(const Matrix& a) { return left_mult(a) - right_mult(a); }

inline SuperOperator superop_from_map(int n_in, int n_out,
                                      const std::function<Matrix(const Matrix&)>& f) {
  Matrix s(n_out * n_out, n_in * n_in);
  for (int j = 0; j < n_in; ++j)
    for (int i = 0; i < n_in; ++i) {
      Matrix e = Matrix::Zero(n_in, n_in);
      e(i, j) = 1.0;
      s.col(i + n_in * j) = vectorize(f(e));
    }
  return {n_in, n_out, s};
}

// Matrix exponential of a general square matrix (Pade scaling and squaring).
inline Matrix expm(const Matrix& a) { return a.exp(); }

// Random instances. Each call owns its generator.
inline Matrix ginibre(int rows, int cols, std::mt19937_64& gen) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      double re = nd(gen), im = nd(gen);
      g(i, j) = cplx(re, im) / std::sqrt(2.0);
    }
  return g;
}

inline Matrix random_hermitian(int n, std::mt19937_64& gen) {
  return hermitian_part(ginibre(n, n, gen));
}

inline Matrix random_unitary(int n, std::mt19937_64& gen) {
  Eigen::HouseholderQR<Matrix> qr(ginibre(n, n, gen));
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR();
  for (int i = 0; i < n; ++i) {
    cplx d = r(i, i);
    if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
  }
  return q;
}

inline Matrix random_density_matrix(int n, bool strict, std::mt19937_64& gen) {
  require(n >= 1, Errc::invalid_input, "random_density needs n >= 1");
  Matrix g = ginibre(n, n, gen);
  Matrix r = g * g.adjoint();
  r /= r.trace().real();
  if (strict) {
    constexpr double eps = 1e-3;
    r = (1.0 - eps) * r + eps * identity(n) / static_cast<double>(n);
  }
  return hermitian_part(r);
}

inline DensityMatrix random_density(int n, bool strict, std::uint64_t seed) {
  require(n >= 1, Errc::invalid_input, "random_density needs n >= 1");
  std::mt19937_64 gen(seed);
  return DensityMatrix(random_density_matrix(n, strict, gen));
}

}  // namespace qms
