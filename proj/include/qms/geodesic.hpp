#pragma once

// Discrete Benamou-Brenier geodesics for the transport metric.
//
// The path rho_0..rho_m is discretized on a uniform grid in s. Fluxes are eliminated exactly
// (F_k = M grad B_k with B_k = K^+ v_k at the midpoint), which leaves the reduced action
//   J = sum_k ds <v_k, K_{rhobar_k}^+ v_k>
// as a function of the interior densities. That is minimized by projected gradient descent
// with Barzilai-Borwein steps and monotone backtracking.

#include <cmath>
#include <limits>
#include <vector>

#include "qms/kernels.hpp"
#include "qms/transport.hpp"

namespace qms {

struct GeodesicOptions {
  int m = 32;
  int max_iter = 5000;
  double tol = 1e-8;
  int patience = 5;
  double floor = 1e-9;
};

struct GeodesicPath {
  int m = 0;
  std::vector<Matrix> densities;       // m + 1 states
  std::vector<VectorField> fluxes;     // m fields, at interval midpoints
  std::vector<double> interval_action; // g at each midpoint
  double action = 0.0;
  double distance = 0.0;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

struct PathEval {
  double action = 0.0;
  std::vector<Matrix> b;
  std::vector<double> parts;
};

inline PathEval evaluate_path(const DBGenerator& db, const std::vector<Matrix>& rho) {
  const int m = static_cast<int>(rho.size()) - 1;
  PathEval e;
  e.b.resize(m);
  e.parts.resize(m);
  for (int k = 0; k < m; ++k) {
    Matrix mid = 0.5 * (rho[k] + rho[k + 1]);
    Matrix v = static_cast<double>(m) * (rho[k + 1] - rho[k]);
    MetricOperator op(db, mid);
    e.b[k] = hermitian_part(op.pinv_apply(v));
    e.parts[k] = hs_inner(v, e.b[k]).real();
    e.action += e.parts[k] / m;
  }
  return e;
}

inline double phi(double x, double y, double a, double b) { return log_mean(a * x, b * y); }

// Divided difference of x -> log_mean(a x, b y) between x1 and x2.
inline double dd_left(double x1, double x2, double y, double a, double b) {
  double s = std::max(std::abs(x1), std::abs(x2));
  if (std::abs(x1 - x2) <= 1e-5 * s) return a * log_mean_dx(a * 0.5 * (x1 + x2), b * y);
  return (phi(x1, y, a, b) - phi(x2, y, a, b)) / (x1 - x2);
}

inline double dd_right(double y1, double y2, double x, double a, double b) {
  double s = std::max(std::abs(y1), std::abs(y2));
  if (std::abs(y1 - y2) <= 1e-5 * s) return b * log_mean_dx(b * 0.5 * (y1 + y2), a * x);
  return (phi(x, y1, a, b) - phi(x, y2, a, b)) / (y1 - y2);
}

}  // namespace detail

// Gradient in rho of q(rho) = sum_j <grad_j B, M_{j,rho} grad_j B>, as a Hermitian matrix G with
// dq = Tr[G drho].
inline Matrix mobility_gradient(const DBGenerator& db, const Matrix& rho, const Matrix& b) {
  Eigensystem es = eigh(rho);
  const Matrix& u = es.vectors;
  const RVector& lam = es.values;
  const Eigen::Index n = lam.size();
  Matrix g = Matrix::Zero(n, n);
  for (const auto& jp : db.jumps()) {
    const double a = std::exp(0.5 * jp.omega), bb = std::exp(-0.5 * jp.omega);
    Matrix c = u.adjoint() * commutator(jp.v, b) * u;
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index mm = 0; mm < n; ++mm) {
        cplx s = 0.0;
        for (Eigen::Index l = 0; l < n; ++l) {
          s += std::conj(c(k, l)) * c(mm, l) * detail::dd_left(lam(k), lam(mm), lam(l), a, bb);
          s += std::conj(c(l, mm)) * c(l, k) * detail::dd_right(lam(k), lam(mm), lam(l), a, bb);
        }
        g(mm, k) += s;
      }
  }
  return hermitian_part(u * g * u.adjoint());
}

namespace detail {

inline Matrix project_state(const Matrix& a, double floor) {
  Eigensystem es = eigh(hermitian_part(a));
  RVector v = es.values.cwiseMax(floor);
  return from_eigen(es, v / v.sum());
}

inline std::vector<Matrix> path_gradient(const DBGenerator& db, const std::vector<Matrix>& rho,
                                         const PathEval& e) {
  const int m = static_cast<int>(rho.size()) - 1;
  const int n = db.dim();
  std::vector<Matrix> gm(m);
  for (int k = 0; k < m; ++k) gm[k] = mobility_gradient(db, 0.5 * (rho[k] + rho[k + 1]), e.b[k]);
  std::vector<Matrix> g(m - 1);
  for (int k = 1; k < m; ++k) {
    Matrix gk = 2.0 * (e.b[k - 1] - e.b[k]) - (0.5 / m) * (gm[k - 1] + gm[k]);
    gk = hermitian_part(gk);
    gk -= (gk.trace() / static_cast<double>(n)) * identity(n);
    g[k - 1] = gk;
  }
  return g;
}

inline double inner(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += hs_inner(a[i], b[i]).real();
  return s;
}

}  // namespace detail

inline std::vector<Matrix> geodesic_initial_path(const Matrix& rho0, const Matrix& rho1, int m) {
  Matrix l0 = log_psd(rho0), l1 = log_psd(rho1);
  std::vector<Matrix> path(m + 1);
  path[0] = rho0;
  path[m] = rho1;
  for (int k = 1; k < m; ++k) {
    double s = static_cast<double>(k) / m;
    Matrix e = exp_hermitian((1.0 - s) * l0 + s * l1);
    path[k] = e / e.trace().real();
  }
  return path;
}

inline GeodesicPath finalize_path(const DBGenerator& db, std::vector<Matrix> rho, int iterations, bool converged) {
  GeodesicPath p;
  p.m = static_cast<int>(rho.size()) - 1;
  detail::PathEval e = detail::evaluate_path(db, rho);
  for (int k = 0; k < p.m; ++k)
    p.fluxes.push_back(m_rho_apply(db, 0.5 * (rho[k] + rho[k + 1]), gradient(db, e.b[k])));
  p.densities = std::move(rho);
  p.interval_action = e.parts;
  p.action = e.action;
  p.distance = std::sqrt(std::max(0.0, e.action));
  p.iterations = iterations;
  p.converged = converged;
  return p;
}

// Strict endpoints are required; the solver refuses states on the boundary.
inline GeodesicPath geodesic_distance(const DBGenerator& db, const Matrix& rho0, const Matrix& rho1,
                                      const GeodesicOptions& opt = {}) {
  require(opt.m >= 1, Errc::invalid_input, "geodesic: m must be positive");
  require(rho0.rows() == db.dim() && rho1.rows() == db.dim(), Errc::shape_mismatch,
          "geodesic: endpoint dimension differs from generator");
  DensityMatrix d0(rho0), d1(rho1);
  require(d0.strict() && d1.strict(), Errc::precondition_violated, "geodesic: endpoints must be strictly positive");
  require_ergodic(db, "geodesic");

  std::vector<Matrix> rho = geodesic_initial_path(d0.mat(), d1.mat(), opt.m);
  detail::PathEval e = detail::evaluate_path(db, rho);
  if (opt.m == 1 || e.action <= 1e-300) return finalize_path(db, std::move(rho), 0, true);

  std::vector<Matrix> g = detail::path_gradient(db, rho, e);
  double gnorm = std::sqrt(detail::inner(g, g));
  double lmin = 1.0;
  for (const auto& r : rho) lmin = std::min(lmin, eigh(r).values(0));
  double tau = gnorm > 0 ? 0.1 * lmin / gnorm : 1.0;

  int calm = 0, it = 0;
  bool converged = false;
  for (; it < opt.max_iter; ++it) {
    std::vector<Matrix> trial(rho);
    detail::PathEval et;
    bool accepted = false;
    for (int h = 0; h < 60; ++h) {
      for (int k = 1; k < opt.m; ++k) trial[k] = detail::project_state(rho[k] - tau * g[k - 1], opt.floor);
      et = detail::evaluate_path(db, trial);
      if (std::isfinite(et.action) && et.action <= e.action) {
        accepted = true;
        break;
      }
      tau *= 0.5;
    }
    if (!accepted) {
      converged = true;
      break;
    }
    std::vector<Matrix> gt = detail::path_gradient(db, trial, et);
    std::vector<Matrix> s(opt.m - 1), y(opt.m - 1);
    for (int k = 1; k < opt.m; ++k) {
      s[k - 1] = trial[k] - rho[k];
      y[k - 1] = gt[k - 1] - g[k - 1];
    }
    double sy = detail::inner(s, y), ss = detail::inner(s, s);
    tau = (sy > 0 && ss > 0) ? ss / sy : 2.0 * tau;

    double rel = (e.action - et.action) / std::max(e.action, 1e-300);
    rho.swap(trial);
    g.swap(gt);
    e = std::move(et);
    calm = rel <= opt.tol ? calm + 1 : 0;
    if (calm >= opt.patience || e.action <= 1e-300) {
      converged = true;
      ++it;
      break;
    }
  }
  return finalize_path(db, std::move(rho), it, converged);
}

}  // namespace qms
