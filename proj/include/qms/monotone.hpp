#pragma once

// The J_f family of two-variable operator means and the Lieb monotonicity checks.
//
// J_f(X,Y) K acts in the (Y-eigen, X-eigen) frame by the weights
// w_ij = f(lambda_j / mu_i) mu_i, where X has eigenvalues lambda and Y has mu.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qms/channels.hpp"
#include "qms/kernels.hpp"
#include "qms/matcore.hpp"

namespace qms {

struct OperatorMonotoneF {
  enum class Kind { power, logmean, custom_loewner };
  Kind kind = Kind::logmean;
  double t = 0.5;      // power
  double beta = 0.0;   // custom_loewner intercept
  double gamma = 0.0;  // custom_loewner slope
  std::vector<std::pair<double, double>> atoms;  // (lambda_k, weight_k), weight > 0

  static OperatorMonotoneF power(double t) {
    require(t > 0.0 && t < 1.0, Errc::invalid_input, "power kind needs 0 < t < 1");
    OperatorMonotoneF f;
    f.kind = Kind::power;
    f.t = t;
    return f;
  }
  static OperatorMonotoneF logmean() { return {}; }
  static OperatorMonotoneF loewner(double beta, double gamma,
                                   std::vector<std::pair<double, double>> atoms) {
    require(beta >= 0.0 && gamma >= 0.0, Errc::invalid_input, "Loewner intercept and slope must be >= 0");
    for (auto [l, w] : atoms)
      require(l >= 0.0 && w > 0.0, Errc::invalid_input, "Loewner atoms need lambda >= 0, weight > 0");
    OperatorMonotoneF f;
    f.kind = Kind::custom_loewner;
    f.beta = beta;
    f.gamma = gamma;
    f.atoms = std::move(atoms);
    return f;
  }

  // f(lam / mu) * mu for lam, mu > 0.
  double homogeneous(double lam, double mu) const {
    switch (kind) {
      case Kind::power: return std::pow(lam, t) * std::pow(mu, 1.0 - t);
      case Kind::logmean: return log_mean(lam, mu);
      case Kind::custom_loewner: {
        double v = beta * mu + gamma * lam;
        for (auto [l, w] : atoms) v += w * (1.0 + l) * lam * mu / (l * mu + lam);
        return v;
      }
    }
    return 0.0;
  }
  double operator()(double x) const { return homogeneous(x, 1.0); }
};

class JOperator {
 public:
  JOperator(const OperatorMonotoneF& f, const Matrix& x, const Matrix& y) : f_(f) {
    require(x.rows() == y.rows() && x.rows() == x.cols(), Errc::shape_mismatch,
            "J_f needs square X, Y of equal size");
    ex_ = eigh(x);
    ey_ = eigh(y);
    require(ex_.values(0) >= -1e-10 * std::max(1.0, ex_.values.cwiseAbs().maxCoeff()) &&
                ey_.values(0) >= -1e-10 * std::max(1.0, ey_.values.cwiseAbs().maxCoeff()),
            Errc::invalid_input, "J_f needs positive semidefinite X and Y");
    const Eigen::Index n = x.rows();
    double sx = std::max(ex_.values.cwiseAbs().maxCoeff(), 1e-300);
    double sy = std::max(ey_.values.cwiseAbs().maxCoeff(), 1e-300);
    w_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        double mu = ey_.values(i), lam = ex_.values(j);
        bool zero = mu <= 1e-12 * sy || lam <= 1e-12 * sx;
        w_(i, j) = zero ? 0.0 : f_.homogeneous(lam, mu);
      }
  }

  const RMatrix& kernel() const { return w_; }
  int dim() const { return static_cast<int>(w_.rows()); }

  Matrix apply(const Matrix& k) const { return frame_multiply(ey_.vectors, w_, ex_.vectors, k); }

  Matrix pinv_apply(const Matrix& k) const {
    Matrix kh = ey_.vectors.adjoint() * k * ex_.vectors;
    double scale = std::max(max_abs(k), 1e-300);
    RMatrix wi(w_.rows(), w_.cols());
    for (Eigen::Index i = 0; i < w_.rows(); ++i)
      for (Eigen::Index j = 0; j < w_.cols(); ++j) {
        if (w_(i, j) > 0.0) {
          wi(i, j) = 1.0 / w_(i, j);
        } else {
          wi(i, j) = 0.0;
          require(std::abs(kh(i, j)) <= 1e-8 * scale, Errc::range_violation,
                  "argument is outside the range of J_f");
        }
      }
    return ey_.vectors * (kh.array() * wi.cast<cplx>().array()).matrix() * ex_.vectors.adjoint();
  }

  // As an n^2 x n^2 matrix on column-stacked vectors.
  Matrix superop(bool pinv = false) const {
    const Eigen::Index n = w_.rows();
    Matrix q = kron(ex_.vectors.conjugate(), ey_.vectors);
    RVector d(n * n);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index i = 0; i < n; ++i) {
        double w = w_(i, j);
        d(i + n * j) = pinv ? (w > 0.0 ? 1.0 / w : 0.0) : w;
      }
    return q * d.cast<cplx>().asDiagonal() * q.adjoint();
  }

 private:
  OperatorMonotoneF f_;
  Eigensystem ex_, ey_;
  RMatrix w_;
};

inline Matrix j_apply(const JOperator& j, const Matrix& k) { return j.apply(k); }
inline Matrix j_pinv_apply(const JOperator& j, const Matrix& k) { return j.pinv_apply(k); }

// Tr[K rho^{t-1} K rho^{-t}]
inline double gamma_t(const Matrix& rho, const Matrix& k, double t) {
  Eigensystem es = eigh(rho);
  require_strict(es.values, "gamma_t needs a strict state");
  Matrix a = from_eigen(es, es.values.array().pow(t - 1.0).matrix());
  Matrix b = from_eigen(es, es.values.array().pow(-t).matrix());
  return (k * a * k * b).trace().real();
}

inline double gamma_hat(const Matrix& rho, const Matrix& k) {
  Eigensystem es = eigh(rho);
  require_strict(es.values, "gamma_hat needs a strict state");
  Matrix kh = es.vectors.adjoint() * k * es.vectors;
  double s = 0.0;
  for (Eigen::Index i = 0; i < kh.rows(); ++i)
    for (Eigen::Index j = 0; j < kh.cols(); ++j)
      s += std::norm(kh(i, j)) * log_divided(es.values(i), es.values(j));
  return s;
}

enum class Theorem { L1M, L2M, L3M };

inline const char* theorem_name(Theorem t) {
  switch (t) {
    case Theorem::L1M: return "L1M";
    case Theorem::L2M: return "L2M";
    case Theorem::L3M: return "L3M";
  }
  return "?";
}

struct MonotoneResult {
  double minorant = 0.0;
  double majorant = 0.0;
  double slack = 0.0;
  bool pass = false;
};

inline constexpr double kMonotoneTol = 1e-8;

inline void require_unital_cp(const QuantumChannel& phi, const char* who) {
  require(phi.orientation() == Orientation::unital, Errc::precondition_violated,
          std::string(who) + ": map must be in unital orientation");
  require(phi.closure_residual() <= kClosureTol, Errc::precondition_violated,
          std::string(who) + ": map is not unital");
}

inline void require_strict_named(const Matrix& a, const char* name) {
  double me = min_eigenvalue(a);
  require(me > 1e-10, Errc::precondition_violated, std::string(name) + " is not strictly positive");
}

// Phi: M_n -> M_m unital CP (unital orientation, n = n_in, m = n_out).
// L1M: X, Y in M_m PSD, K in M_n. L2M/L3M: X, Y in M_m strict, K in M_m.
inline MonotoneResult monotonicity_check(Theorem th, const QuantumChannel& phi, const Matrix& x,
                                         const Matrix& y, const Matrix& k, double t = 0.5) {
  require_unital_cp(phi, "monotonicity_check");
  const int n = phi.n_in(), m = phi.n_out();
  require(x.rows() == m && y.rows() == m, Errc::precondition_violated,
          "X and Y must live on the output side of the map");
  QuantumChannel phid = phi.adjoint();
  Matrix px = phid.apply(x), py = phid.apply(y);
  MonotoneResult r;
  if (th == Theorem::L1M) {
    require(k.rows() == n, Errc::precondition_violated, "K must live on the input side for L1M");
    require(t >= 0.0 && t <= 1.0, Errc::precondition_violated, "t must lie in [0,1]");
    Matrix fk = phi.apply(k);
    if (t > 0.0 && t < 1.0) {
      auto f = OperatorMonotoneF::power(t);
      r.minorant = hs_inner(fk, JOperator(f, x, y).apply(fk)).real();
      r.majorant = hs_inner(k, JOperator(f, px, py).apply(k)).real();
    } else {
      r.minorant = (fk.adjoint() * power_psd(y, 1.0 - t) * fk * power_psd(x, t)).trace().real();
      r.majorant = (k.adjoint() * power_psd(py, 1.0 - t) * k * power_psd(px, t)).trace().real();
    }
  } else {
    require(k.rows() == m, Errc::precondition_violated, "K must live on the output side");
    require_strict_named(x, "X");
    require_strict_named(y, "Y");
    require_strict_named(px, "Phi^dagger(X)");
    require_strict_named(py, "Phi^dagger(Y)");
    OperatorMonotoneF f = OperatorMonotoneF::logmean();
    if (th == Theorem::L2M) {
      require(t > 0.0 && t < 1.0, Errc::precondition_violated, "L2M needs 0 < t < 1");
      f = OperatorMonotoneF::power(t);
    }
    Matrix pk = phid.apply(k);
    r.minorant = hs_inner(pk, JOperator(f, px, py).pinv_apply(pk)).real();
    r.majorant = hs_inner(k, JOperator(f, x, y).pinv_apply(k)).real();
  }
  r.slack = r.majorant - r.minorant;
  r.pass = r.slack >= -kMonotoneTol * std::max(1.0, std::abs(r.majorant));
  return r;
}

struct DualityReport {
  int trials = 0;
  double worst_slack_forward = 0.0;  // <Phi K, J Phi K> <= <K, J' K>, K on the input side
  double worst_slack_inverse = 0.0;  // <Phi^dag K, J'^+ Phi^dag K> <= <K, J^-1 K>, K on the output side
  bool pass_forward = false;
  bool pass_inverse = false;
  double ratio_forward = 0.0;  // sharpest constant of the forward form
  double ratio_inverse = 0.0;  // sharpest constant of the inverse form
  bool agree() const { return pass_forward == pass_inverse; }
};

inline double top_eigenvalue(const Matrix& h) { return eigh(h).values.maxCoeff(); }

inline DualityReport duality_check(const OperatorMonotoneF& f, const QuantumChannel& phi,
                                   const Matrix& x, const Matrix& y, int trials = 100,
                                   std::uint64_t seed = 1) {
  require_unital_cp(phi, "duality_check");
  const int n = phi.n_in(), m = phi.n_out();
  require_strict_named(x, "X");
  require_strict_named(y, "Y");
  QuantumChannel phid = phi.adjoint();
  Matrix px = phid.apply(x), py = phid.apply(y);
  JOperator a(f, x, y), b(f, px, py);

  DualityReport r;
  r.trials = trials;
  r.worst_slack_forward = r.worst_slack_inverse = std::numeric_limits<double>::infinity();
  std::mt19937_64 gen(seed);
  for (int i = 0; i < trials; ++i) {
    Matrix k = ginibre(n, n, gen);
    Matrix fk = phi.apply(k);
    double lhs = hs_inner(fk, a.apply(fk)).real();
    double rhs = hs_inner(k, b.apply(k)).real();
    r.worst_slack_forward = std::min(r.worst_slack_forward, (rhs - lhs) / std::max(1.0, rhs));
  }
  for (int i = 0; i < trials; ++i) {
    Matrix k = ginibre(m, m, gen);
    Matrix pk = phid.apply(k);
    double lhs = hs_inner(pk, b.pinv_apply(pk)).real();
    double rhs = hs_inner(k, a.pinv_apply(k)).real();
    r.worst_slack_inverse = std::min(r.worst_slack_inverse, (rhs - lhs) / std::max(1.0, rhs));
  }
  r.pass_forward = r.worst_slack_forward >= -kMonotoneTol;
  r.pass_inverse = r.worst_slack_inverse >= -kMonotoneTol;

  // Sharpest constants, each from its own operator pencil.
  Matrix sphi = phi.superop().mat;  // M_n -> M_m
  Matrix ja = a.superop(), jb = b.superop(), jbp = b.superop(true);
  Eigensystem eb = eigh(jb);
  RVector d(eb.values.size());
  for (Eigen::Index i = 0; i < d.size(); ++i)
    d(i) = eb.values(i) > 1e-14 * eb.values.maxCoeff() ? 1.0 / std::sqrt(eb.values(i)) : 0.0;
  Matrix jb_mhalf = from_eigen(eb, d);
  r.ratio_forward = top_eigenvalue(jb_mhalf * sphi.adjoint() * ja * sphi * jb_mhalf);
  Eigensystem ea = eigh(ja);
  Matrix ja_half = from_eigen(ea, ea.values.cwiseMax(0.0).cwiseSqrt());
  r.ratio_inverse = top_eigenvalue(ja_half * sphi * jbp * sphi.adjoint() * ja_half);
  return r;
}

}  // namespace qms
