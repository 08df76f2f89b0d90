#pragma once

// Lindblad generators: GKS assembly, generator recognition, GNS detailed balance
// and the decomposition into eigen-jumps {(V_j, omega_j)} with
//   L(A) = sum_j e^{-omega_j/2} (V_j*[A, V_j] + [V_j*, A] V_j),  sigma V_j sigma^-1 = e^{-omega_j} V_j.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qms/channels.hpp"
#include "qms/entropy.hpp"
#include "qms/matcore.hpp"

namespace qms {

struct GksParts {
  std::vector<Matrix> kraus;  // Phi(A) = sum V* A V
  Matrix g;                   // L(A) = Phi(A) - G* A - A G
  Matrix h;                   // Hamiltonian, G = Phi(1)/2 + iH
};

inline double superop_norm(const SuperOperator& s) { return s.mat.norm(); }

struct Generator {
  int n = 0;
  SuperOperator L;     // Heisenberg
  SuperOperator Ldag;  // Schroedinger
  std::optional<GksParts> parts;

  Generator() = default;
  explicit Generator(SuperOperator l, std::optional<GksParts> p = std::nullopt)
      : n(l.n_in), L(std::move(l)), parts(std::move(p)) {
    require(L.n_in == L.n_out, Errc::shape_mismatch, "generator must act on M_n");
    Ldag = L.adjoint();
  }
  double unitality_residual() const { return max_abs(L.apply(identity(n))); }
  double trace_residual() const {
    double r = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        Matrix e = Matrix::Zero(n, n);
        e(i, j) = 1.0;
        r = std::max(r, std::abs(Ldag.apply(e).trace()));
      }
    return r;
  }
};

inline SuperOperator gks_superop(const std::vector<Matrix>& kraus, const Matrix& h) {
  const int n = static_cast<int>(h.rows());
  SuperOperator phi(n, n, Matrix::Zero(n * n, n * n));
  Matrix phi1 = Matrix::Zero(n, n);
  for (const auto& v : kraus) {
    require(v.rows() == n && v.cols() == n, Errc::shape_mismatch, "Kraus operator shape");
    phi.mat += sandwich(v.adjoint(), v).mat;
    phi1 += v.adjoint() * v;
  }
  SuperOperator l = phi - (left_mult(phi1) + right_mult(phi1)) * cplx(0.5) +
                    commutator_op(h) * cplx(0.0, 1.0);
  return l;
}

// L(A) = Phi(A) - (Phi(1)A + A Phi(1))/2 + i[H, A]; Phi given by Heisenberg Kraus operators.
inline Generator assemble_gks(const std::vector<Matrix>& kraus, const Matrix& h) {
  HermitianMatrix hh(h);
  Matrix g = Matrix::Zero(h.rows(), h.cols());
  for (const auto& v : kraus) g += 0.5 * v.adjoint() * v;
  g += cplx(0.0, 1.0) * hh.mat();
  return Generator(gks_superop(kraus, hh.mat()), GksParts{kraus, g, hh.mat()});
}

inline Generator assemble_gks(const SuperOperator& phi, const Matrix& h) {
  CPReport cp = is_completely_positive(phi);
  require(cp.cp, Errc::not_cp,
          "Phi is not completely positive (min eigenvalue " + std::to_string(cp.min_eigenvalue) + ")");
  return assemble_gks(cp.kraus, h);
}

inline double hermiticity_preservation_residual(const SuperOperator& l) {
  const int n = l.n_in;
  double r = 0.0;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      Matrix e = Matrix::Zero(n, n);
      e(i, j) = 1.0;
      r = std::max(r, max_abs(l.apply(e.adjoint()) - l.apply(e).adjoint()));
    }
  return r;
}

struct QmsReport {
  bool qms = false;
  double min_reduced_eigenvalue = 0.0;
  std::optional<GksParts> parts;
};

inline QmsReport is_qms_generator(const SuperOperator& l) {
  require(l.n_in == l.n_out, Errc::shape_mismatch, "generator must act on M_n");
  const int n = l.n_in;
  double scale = std::max(1.0, max_abs(l.mat));
  require(max_abs(l.apply(identity(n))) <= 1e-9 * scale, Errc::not_unital_generator,
          "L(1) != 0");
  require(hermiticity_preservation_residual(l) <= 1e-9 * scale, Errc::not_unital_generator,
          "L does not preserve self-adjointness");
  CharacteristicMatrix cm = characteristic_matrix(l, unital_basis(n));
  const int d = n * n;
  Matrix r = hermitian_part(cm.matrix.block(1, 1, d - 1, d - 1));
  QmsReport rep;
  RVector ev = eigh(r).values;
  rep.min_reduced_eigenvalue = ev.size() ? ev(0) : 0.0;
  rep.qms = rep.min_reduced_eigenvalue >= -1e-9 * scale;
  if (rep.qms) {
    std::vector<Matrix> rest(cm.basis.begin() + 1, cm.basis.end());
    GksParts p;
    double rs = std::max(ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0, 1e-300);
    p.kraus = kraus_from_coefficients(r, rest, 1e-12 * rs);
    p.g = -0.5 * cm.matrix(0, 0) * identity(n);
    for (int b = 1; b < d; ++b) p.g -= cm.matrix(0, b) * cm.basis[b];
    p.h = hermitian_part((p.g - p.g.adjoint()) / cplx(0.0, 2.0));
    rep.parts = p;
  }
  return rep;
}

// Gram matrix of <X, Y>_GNS = Tr[X* Y sigma] on column-stacked vectors.
inline Matrix gns_gram(const Matrix& sigma) {
  return kron(sigma.transpose(), identity(static_cast<int>(sigma.rows())));
}

struct DbReport {
  bool db = false;
  double residual = 0.0;      // GNS self-adjointness
  double stationarity = 0.0;  // |L^dag sigma|
};

inline DbReport db_check_gns(const SuperOperator& l, const Matrix& sigma) {
  require(sigma.rows() == l.n_in, Errc::shape_mismatch, "sigma dimension");
  Matrix g = gns_gram(sigma);
  DbReport r;
  r.residual = max_abs(l.mat.adjoint() * g - g * l.mat);
  r.stationarity = max_abs(l.adjoint().apply(sigma));
  r.db = r.residual <= 1e-9 && r.stationarity <= 1e-9;
  return r;
}

inline SuperOperator modular_operator(const Matrix& sigma) {
  return sandwich(sigma, power_psd(sigma, -1.0));
}

// |L Delta - Delta L| / |L|, Frobenius norms.
inline double modular_commutation_check(const SuperOperator& l, const Matrix& sigma) {
  SuperOperator d = modular_operator(sigma);
  double nl = superop_norm(l);
  if (nl == 0.0) return 0.0;
  return (l.mat * d.mat - d.mat * l.mat).norm() / nl;
}

// Gram matrix of the BKM inner product <X, D_sigma^-1 Y>.
inline Matrix bkm_gram(const Matrix& sigma) {
  Eigensystem es = eigh(sigma);
  require_strict(es.values, "BKM product needs a strict state");
  const int n = static_cast<int>(sigma.rows());
  Matrix q = kron(es.vectors.conjugate(), es.vectors);
  RVector d(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) d(i + n * j) = log_mean(es.values(i), es.values(j));
  return q * d.cast<cplx>().asDiagonal() * q.adjoint();
}

inline double bkm_selfadjoint_check(const SuperOperator& l, const Matrix& sigma) {
  Matrix g = bkm_gram(sigma);
  return max_abs(l.mat.adjoint() * g - g * l.mat);
}

struct Jump {
  Matrix v;
  double omega = 0.0;
};

// X -> V*[X, V] + [V*, X] V
inline SuperOperator jump_superop(const Matrix& v) {
  Matrix vv = v.adjoint() * v;
  return sandwich(v.adjoint(), v) * cplx(2.0) - left_mult(vv) - right_mult(vv);
}

struct DbInvariants {
  double modular = 0.0;  // max |sigma V sigma^-1 - e^{-omega} V|
  double closure = 0.0;  // worst matched |V_j* - V_j*| and |omega_j* + omega_j|
  std::vector<int> partner;
};

inline DbInvariants db_invariants(const Matrix& sigma, const std::vector<Jump>& jumps) {
  DbInvariants r;
  Matrix sinv = power_psd(sigma, -1.0);
  for (const auto& j : jumps)
    r.modular = std::max(r.modular, max_abs(sigma * j.v * sinv - std::exp(-j.omega) * j.v));
  const std::size_t m = jumps.size();
  std::vector<bool> used(m, false);
  r.partner.assign(m, -1);
  for (std::size_t a = 0; a < m; ++a) {
    if (r.partner[a] >= 0) continue;
    double best = std::numeric_limits<double>::infinity();
    int arg = -1;
    Matrix va = jumps[a].v.adjoint();
    for (std::size_t b = 0; b < m; ++b) {
      if (used[b] && b != a) continue;
      double d = std::max(max_abs(jumps[b].v - va), std::abs(jumps[b].omega + jumps[a].omega));
      if (d < best) {
        best = d;
        arg = static_cast<int>(b);
      }
    }
    r.partner[a] = arg;
    r.partner[arg] = static_cast<int>(a);
    used[a] = used[arg] = true;
    r.closure = std::max(r.closure, best);
  }
  return r;
}

class DBGenerator {
 public:
  DBGenerator() = default;
  DBGenerator(const Matrix& sigma, std::vector<Jump> jumps, double bohr_tol = 1e-9)
      : sigma_(DensityMatrix::normalized(sigma).mat()), jumps_(std::move(jumps)), bohr_tol_(bohr_tol) {
    require(max_abs(sigma_ - sigma) <= 1e-9, Errc::invalid_input, "sigma is not a density matrix");
    require_density(sigma_, true, "DBGenerator");
    for (const auto& j : jumps_)
      require(j.v.rows() == dim() && j.v.cols() == dim(), Errc::shape_mismatch, "jump shape");
    DbInvariants inv = db_invariants(sigma_, jumps_);
    double scale = 1.0;
    for (const auto& j : jumps_) scale = std::max(scale, max_abs(j.v));
    require(inv.modular <= 1e-8 * scale, Errc::invalid_input,
            "jump is not an eigenvector of the modular operator");
    require(inv.closure <= 1e-8 * scale, Errc::invalid_input, "jump set is not closed under adjoints");
    partner_ = inv.partner;
  }

  int dim() const { return static_cast<int>(sigma_.rows()); }
  const Matrix& sigma() const { return sigma_; }
  const std::vector<Jump>& jumps() const { return jumps_; }
  std::size_t size() const { return jumps_.size(); }
  double bohr_tolerance() const { return bohr_tol_; }
  int partner(std::size_t j) const { return partner_[j]; }

  SuperOperator superop() const {
    const int n = dim();
    SuperOperator l(n, n, Matrix::Zero(n * n, n * n));
    for (const auto& j : jumps_) l.mat += std::exp(-0.5 * j.omega) * jump_superop(j.v).mat;
    return l;
  }
  Generator generator() const { return Generator(superop()); }

  // L^dag rho = sum e^{-omega/2} ([V, rho V*] + [V rho, V*])
  Matrix schroedinger(const Matrix& rho) const {
    Matrix out = Matrix::Zero(dim(), dim());
    for (const auto& j : jumps_) {
      const Matrix& v = j.v;
      Matrix vd = v.adjoint();
      out += std::exp(-0.5 * j.omega) * (commutator(v, rho * vd) + commutator(v * rho, vd));
    }
    return out;
  }

 private:
  Matrix sigma_;
  std::vector<Jump> jumps_;
  double bohr_tol_ = 1e-9;
  std::vector<int> partner_;
};

struct ErgodicityReport {
  bool ergodic = false;
  int commutant_dim = 0;
};

inline ErgodicityReport ergodicity_check(const DBGenerator& db) {
  const int n = db.dim();
  ErgodicityReport r;
  if (db.size() == 0) {
    r.commutant_dim = n * n;
    r.ergodic = n == 1;
    return r;
  }
  Matrix stacked(db.size() * n * n, n * n);
  for (std::size_t j = 0; j < db.size(); ++j)
    stacked.block(j * n * n, 0, n * n, n * n) = commutator_op(db.jumps()[j].v).mat;
  Eigen::JacobiSVD<Matrix> svd(stacked);
  RVector s = svd.singularValues();
  double smax = s.size() ? s(0) : 0.0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > 1e-9 * smax) ++rank;
  r.commutant_dim = n * n - rank;
  r.ergodic = r.commutant_dim == 1;
  return r;
}

enum class Side { heisenberg, schroedinger };

inline Matrix semigroup_apply(const SuperOperator& l, double t, const Matrix& x, Side side) {
  require(t >= 0.0, Errc::invalid_input, "semigroup time must be >= 0");
  const Matrix& m = side == Side::heisenberg ? l.mat : Matrix(l.mat.adjoint());
  return devectorize(expm(t * m) * vectorize(x), l.n_in);
}

inline SuperOperator semigroup(const SuperOperator& l, double t, Side side = Side::heisenberg) {
  Matrix m = side == Side::heisenberg ? l.mat : Matrix(l.mat.adjoint());
  return {l.n_in, l.n_out, expm(t * m)};
}

// Bohr-frequency clustering: consecutive sorted values closer than tol (1 + |w|).
inline std::vector<int> cluster_labels(const std::vector<double>& w, double tol,
                                       std::vector<double>* centers = nullptr) {
  std::vector<std::size_t> idx(w.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return w[a] < w[b]; });
  std::vector<int> label(w.size(), -1);
  std::vector<double> c;
  int cur = -1;
  double prev = 0.0;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    double x = w[idx[k]];
    if (cur < 0 || std::abs(x - prev) > tol * (1.0 + std::abs(x))) {
      ++cur;
      c.push_back(x);
    }
    label[idx[k]] = cur;
    prev = x;
  }
  if (centers) *centers = c;
  return label;
}

struct DecomposeReport {
  double reconstruction = 0.0;  // |L - rebuilt| / |L|
  double leakage = 0.0;         // largest off-block characteristic entry
  double modular = 0.0;
  double closure = 0.0;
};

inline DBGenerator alicki_decompose(const SuperOperator& l, const Matrix& sigma,
                                    DecomposeReport* report = nullptr, double bohr_tol = 1e-9) {
  const int n = l.n_in;
  require(l.n_out == n && sigma.rows() == n, Errc::shape_mismatch, "alicki_decompose dimensions");
  DbReport dbr = db_check_gns(l, sigma);
  require(dbr.db, Errc::not_detailed_balance,
          "detailed balance residual " + std::to_string(std::max(dbr.residual, dbr.stationarity)) +
              " > tol");
  Eigensystem es = eigh(sigma);
  require_strict(es.values, "alicki_decompose needs a strict sigma");
  const Matrix& u = es.vectors;
  const double sq = std::sqrt(static_cast<double>(n));

  // Matrix units in sigma's eigenbasis, Delta F_ij = e^{w_ij} F_ij.
  std::vector<Matrix> units;
  std::vector<double> w;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      units.push_back(sq * u.col(i) * u.col(j).adjoint());
      w.push_back(std::log(es.values(i)) - std::log(es.values(j)));
    }
  std::vector<double> centers;
  std::vector<int> label = cluster_labels(w, bohr_tol, &centers);
  int zero = -1;
  for (std::size_t c = 0; c < centers.size(); ++c)
    if (std::abs(centers[c]) <= bohr_tol) zero = static_cast<int>(c);
  require(zero >= 0, Errc::invalid_input, "no zero Bohr frequency cluster");

  // Basis: identity and a self-adjoint completion of the zero cluster, then the other clusters.
  std::vector<Matrix> zspan{identity(n)};
  for (std::size_t a = 0; a < units.size(); ++a)
    if (label[a] == zero) {
      zspan.push_back(hermitian_part(units[a]));
      zspan.push_back((units[a] - units[a].adjoint()) / cplx(0.0, 2.0));
    }
  std::vector<Matrix> basis = gram_schmidt(zspan);
  std::vector<int> blk(basis.size(), zero);
  std::vector<double> bw(basis.size(), 0.0);
  for (std::size_t a = 0; a < units.size(); ++a)
    if (label[a] != zero) {
      basis.push_back(units[a]);
      blk.push_back(label[a]);
      bw.push_back(centers[label[a]]);
    }
  require(basis.size() == static_cast<std::size_t>(n * n), Errc::invalid_input,
          "unital eigenbasis construction failed");

  CharacteristicMatrix cm = characteristic_matrix(l, basis);
  const int d = n * n;
  double leak = 0.0;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      if (blk[a] != blk[b]) leak = std::max(leak, std::abs(cm.matrix(a, b)));
  double cscale = std::max(1.0, max_abs(cm.matrix));
  require(leak <= 1e-8 * cscale, Errc::block_leakage,
          "off-block characteristic mass " + std::to_string(leak));

  std::vector<Jump> jumps;
  auto block_indices = [&](int c) {
    std::vector<int> idx;
    for (int a = 1; a < d; ++a)
      if (blk[a] == c) idx.push_back(a);
    return idx;
  };
  auto emit = [&](const Matrix& coeffs, const std::vector<int>& idx, double omega_block,
                  bool hermitian) {
    Eigensystem be = eigh(coeffs);
    // cutoff relative to the whole generator, so an empty block does not emit rounding noise
    const double floor = 1e-10 * std::max(coeffs.trace().real(), max_abs(cm.matrix));
    if (coeffs.trace().real() <= floor) return std::vector<Jump>{};
    std::vector<Jump> out;
    for (Eigen::Index g = 0; g < be.values.size(); ++g) {
      double c = be.values(g);
      if (c <= floor) continue;
      Matrix wmat = Matrix::Zero(n, n);
      for (std::size_t k = 0; k < idx.size(); ++k)
        wmat += std::conj(be.vectors(k, g)) * cm.basis[idx[k]];
      if (hermitian) wmat = hermitian_part(wmat);
      double omega = -omega_block;
      out.push_back({std::sqrt(c * std::exp(0.5 * omega) / 2.0) * wmat, omega});
    }
    return out;
  };

  for (std::size_t c = 0; c < centers.size(); ++c) {
    std::vector<int> idx = block_indices(static_cast<int>(c));
    if (idx.empty()) continue;
    Matrix coeffs(idx.size(), idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a)
      for (std::size_t b = 0; b < idx.size(); ++b) coeffs(a, b) = cm.matrix(idx[a], idx[b]);
    coeffs = hermitian_part(coeffs);
    if (static_cast<int>(c) == zero) {
      // Self-adjoint basis: the coefficient block is real, so the jumps can be taken Hermitian.
      Matrix re = coeffs.real().cast<cplx>();
      for (auto& j : emit(re, idx, 0.0, true)) jumps.push_back(j);
    } else if (centers[c] > 0.0) {
      for (auto& j : emit(coeffs, idx, centers[c], false)) {
        jumps.push_back(j);
        jumps.push_back({j.v.adjoint(), -j.omega});
      }
    }
  }

  DBGenerator db(sigma, jumps, bohr_tol);
  DecomposeReport rep;
  rep.leakage = leak;
  double nl = std::max(superop_norm(l), 1e-300);
  rep.reconstruction = (db.superop().mat - l.mat).norm() / nl;
  DbInvariants inv = db_invariants(db.sigma(), db.jumps());
  rep.modular = inv.modular;
  rep.closure = inv.closure;
  if (report) *report = rep;
  return db;
}

// Tr[X] I / n - X with jumps e_ij / sqrt(2n), sigma = I/n.
inline DBGenerator depolarizing_db(int n) {
  std::vector<Jump> jumps;
  const double s = 1.0 / std::sqrt(2.0 * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      Matrix e = Matrix::Zero(n, n);
      e(i, j) = s;
      jumps.push_back({e, 0.0});
    }
  return DBGenerator(identity(n) / static_cast<double>(n), jumps);
}

inline SuperOperator depolarizing_superop(int n) {
  return superop_from_map(n, n, [n](const Matrix& x) {
    return Matrix(x.trace() * identity(n) / static_cast<double>(n) - x);
  });
}

// Random sigma; jumps are scaled matrix units u_i u_j* of sigma's eigenbasis (both
// orientations), plus a Hermitian jump diagonal in that basis.
inline DBGenerator random_db_generator(int n, std::uint64_t seed) {
  require(n >= 2, Errc::invalid_input, "random_db_generator needs n >= 2");
  std::mt19937_64 gen(seed);
  Matrix sigma = random_density_matrix(n, true, gen);
  sigma = (sigma + 0.05 * identity(n) / static_cast<double>(n)) / 1.05;
  Eigensystem es = eigh(sigma);
  const Matrix& u = es.vectors;
  std::uniform_real_distribution<double> amp(0.3, 1.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<Jump> jumps;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      Matrix v = amp(gen) * u.col(i) * u.col(j).adjoint();
      double omega = std::log(es.values(j)) - std::log(es.values(i));
      jumps.push_back({v, omega});
      jumps.push_back({v.adjoint(), -omega});
    }
  RVector diag(n);
  for (int i = 0; i < n; ++i) diag(i) = 0.5 * nd(gen);
  jumps.push_back({u * diag.cast<cplx>().asDiagonal() * u.adjoint(), 0.0});
  return DBGenerator(es.vectors * es.values.cast<cplx>().asDiagonal() * es.vectors.adjoint(), jumps);
}

}  // namespace qms
