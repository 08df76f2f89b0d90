#pragma once

// Intertwining, action-dissipation / gradient-estimate checks, entropy decay and log-Sobolev.
//
// Both sampled checks are written in metric form. For a field X the action-dissipation side is
// the minimal action of a field with divergence div Q_t^dag X, i.e. g_{P_t^dag rho}(P_t^dag div X),
// which is the Legendre dual of the gradient estimate. Each (rho, t) sample is paired with the
// worst direction of the corresponding quadratic pencil, so a PASS is not an artifact of lucky
// random directions.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "qms/entropy.hpp"
#include "qms/lindblad.hpp"
#include "qms/transport.hpp"

namespace qms {

constexpr double kDissipationTol = 1e-7;
constexpr double kLsiTol = 1e-8;
constexpr double kDecayTol = 1e-9;

// Q_t = grad o P_t o L_0^+ o div, on stacked fields.
inline Matrix intertwiner(const DBGenerator& db, double t) {
  require(t >= 0.0, Errc::invalid_input, "intertwiner: t must be >= 0");
  SuperOperator l0p = l0_pinv(db);
  Matrix pt = semigroup(db.superop(), t).mat;
  return gradient_op(db) * pt * l0p.mat * divergence_op(db);
}

struct CommutatorRate {
  std::size_t j = 0;
  double a = 0.0;
  double residual = 0.0;
  bool accepted = false;
};

struct RatesReport {
  std::vector<CommutatorRate> rates;
  bool uniform = false;  // every fit accepted
  double lambda = 0.0;   // min a_j when uniform
  bool certified() const { return uniform && lambda > 0.0; }
};

// Least-squares a_j with [d_j, L] ~ -a_j d_j for derivation superoperators d_j.
inline RatesReport commutator_rates(const std::vector<Matrix>& derivations, const Matrix& l) {
  RatesReport r;
  r.uniform = !derivations.empty();
  double lam = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < derivations.size(); ++j) {
    const Matrix& d = derivations[j];
    require(d.rows() == l.rows() && d.cols() == l.cols(), Errc::shape_mismatch, "derivation and generator shapes differ");
    Matrix c = d * l - l * d;
    double dn = d.norm();
    CommutatorRate cr;
    cr.j = j;
    if (dn > 0) {
      cr.a = -(d.adjoint() * c).trace().real() / (dn * dn);
      cr.residual = (c + cr.a * d).norm();
    } else {
      cr.residual = c.norm();
    }
    cr.accepted = dn > 0 && cr.residual <= 1e-8 * dn * (1.0 + std::abs(cr.a));
    r.uniform = r.uniform && cr.accepted;
    lam = std::min(lam, cr.a);
    r.rates.push_back(cr);
  }
  r.lambda = r.uniform ? lam : 0.0;
  return r;
}

// d_j = [V_j, .]. For GNS detailed balance with these derivations the fitted a_j vanish.
inline RatesReport commutator_rates(const DBGenerator& db) {
  std::vector<Matrix> ds;
  for (const auto& j : db.jumps()) ds.push_back(commutator_op(j.v).mat);
  return commutator_rates(ds, db.superop().mat);
}

// 1e-3 probe plus 0.05 * 2^k capped at 2.
inline std::vector<double> dissipation_time_grid() {
  std::vector<double> g{1e-3};
  for (double t = 0.05; t < 2.0; t *= 2.0) g.push_back(t);
  g.push_back(2.0);
  return g;
}

struct SampleRecord {
  double t = 0.0;
  double slack = 0.0;
  bool adversarial = false;
};

struct CheckResult {
  std::string check;
  double lambda = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
  double worst_slack = std::numeric_limits<double>::infinity();
  double worst_t = 0.0;
  double tol = kDissipationTol;
  std::vector<SampleRecord> log;
  bool pass() const { return worst_slack >= -tol; }
  void record(double t, double s, bool adv) {
    log.push_back({t, s, adv});
    if (s < worst_slack) {
      worst_slack = s;
      worst_t = t;
    }
  }
};

namespace detail {

inline Matrix random_cmatrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& gen) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Matrix a(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = cplx(nd(gen), nd(gen));
  return a;
}

inline double top_eigenvalue(const Matrix& h) { return eigh(hermitian_part(h)).values.maxCoeff(); }

// K^{+1/2} for a PSD operator with kernel span{1}.
inline Matrix pinv_sqrt(const Matrix& k) {
  Eigensystem es = eigh(k);
  double scale = std::max(es.values.cwiseAbs().maxCoeff(), 1e-300);
  RVector d(es.values.size());
  for (Eigen::Index i = 0; i < d.size(); ++i)
    d(i) = es.values(i) > 1e-10 * scale ? 1.0 / std::sqrt(es.values(i)) : 0.0;
  return from_eigen(es, d);
}

struct Propagators {
  std::vector<double> grid;
  std::vector<Matrix> heis;  // P_t on vec
};

inline Propagators propagators(const DBGenerator& db) {
  Propagators p;
  p.grid = dissipation_time_grid();
  SuperOperator l = db.superop();
  for (double t : p.grid) p.heis.push_back(expm(t * l.mat));
  return p;
}

}  // namespace detail

// slack = e^{-2 lambda t} <X, M_rho^-1 X> - g_{P_t^dag rho}(P_t^dag div X), with <X, M_rho^-1 X> = 1.
inline CheckResult action_dissipation_check(const DBGenerator& db, double lambda, int trials, std::uint64_t seed) {
  require(trials >= 1, Errc::invalid_input, "trials must be >= 1");
  require_ergodic(db, "action_dissipation_check");
  const int n = db.dim();
  CheckResult r{"action_dissipation", lambda, trials, seed};
  std::mt19937_64 gen(seed);
  detail::Propagators prop = detail::propagators(db);
  const Matrix div = divergence_op(db);
  const Eigen::Index dim_j = div.cols();
  for (int i = 0; i < trials; ++i) {
    const std::size_t ti = static_cast<std::size_t>(i) % prop.grid.size();
    const double t = prop.grid[ti];
    const Matrix& pt = prop.heis[ti];
    Matrix rho = random_density_matrix(n, true, gen);
    Matrix rho_t = devectorize(pt.adjoint() * vectorize(rho), n);
    MetricOperator kt(db, hermitian_part(rho_t));
    const double env = std::exp(-2.0 * lambda * t);

    CVector x = detail::random_cmatrix(dim_j, 1, gen).col(0);
    VectorField xf = unstack(x, n, db.size());
    double norm = field_action(db, rho, xf);
    Matrix c = devectorize(pt.adjoint() * div * x, n);
    double lhs = hs_inner(c, kt.pinv_apply(c)).real();
    r.record(t, env - lhs / norm, false);

    // worst direction: top of B* K_t^+ B with B = P_t^dag div M^{1/2}; same nonzero spectrum
    // as K_t^{+1/2} B B* K_t^{+1/2}, which lives on n^2 instead of |J| n^2
    Matrix b = pt.adjoint() * div * m_rho_op(db, rho, 0.5);
    Matrix s = detail::pinv_sqrt(kt.superop());
    r.record(t, env - detail::top_eigenvalue(s * (b * b.adjoint()) * s), true);
  }
  return r;
}

// slack = <grad Y, M_{P_t^dag rho} grad Y> - e^{2 lambda t} <grad P_t Y, M_rho grad P_t Y>, first term = 1.
inline CheckResult gradient_estimate_check(const DBGenerator& db, double lambda, int trials, std::uint64_t seed) {
  require(trials >= 1, Errc::invalid_input, "trials must be >= 1");
  require_ergodic(db, "gradient_estimate_check");
  const int n = db.dim();
  CheckResult r{"gradient_estimate", lambda, trials, seed};
  std::mt19937_64 gen(seed);
  detail::Propagators prop = detail::propagators(db);
  for (int i = 0; i < trials; ++i) {
    const std::size_t ti = static_cast<std::size_t>(i) % prop.grid.size();
    const double t = prop.grid[ti];
    const Matrix& pt = prop.heis[ti];
    Matrix rho = random_density_matrix(n, true, gen);
    Matrix rho_t = hermitian_part(devectorize(pt.adjoint() * vectorize(rho), n));
    const double grow = std::exp(2.0 * lambda * t);

    Matrix y = detail::random_cmatrix(n, n, gen);
    Matrix pty = devectorize(pt * vectorize(y), n);
    double first = field_inner(gradient(db, y), m_rho_apply(db, rho_t, gradient(db, y))).real();
    double second = field_inner(gradient(db, pty), m_rho_apply(db, rho, gradient(db, pty))).real();
    r.record(t, first > 1e-300 ? 1.0 - grow * second / first : 0.0, false);

    // worst direction: top of the pencil (P_t* K_rho P_t, K_{rho_t})
    MetricOperator k(db, rho), kt(db, rho_t);
    Matrix s = detail::pinv_sqrt(kt.superop());
    Matrix a = s * pt.adjoint() * k.superop() * pt * s;
    r.record(t, 1.0 - grow * detail::top_eigenvalue(a), true);
  }
  return r;
}

struct DecayRow {
  double t = 0.0;
  double entropy = 0.0;
  double envelope = 0.0;
  double slack = 0.0;
  bool pass = false;
};

struct DecayTable {
  std::vector<DecayRow> rows;
  bool monotone = true;
  bool pass() const {
    return monotone && std::all_of(rows.begin(), rows.end(), [](const DecayRow& r) { return r.pass; });
  }
};

// D(P_t^dag rho0 || sigma) against e^{-2 lambda t} D(rho0 || sigma).
inline DecayTable decay_check(const DBGenerator& db, double lambda, const Matrix& rho0, const std::vector<double>& t_grid) {
  require_density(rho0, false, "decay_check");
  DecayTable tab;
  SuperOperator l = db.superop();
  const double d0 = relative_entropy(rho0, db.sigma());
  double prev = std::numeric_limits<double>::infinity();
  std::vector<double> ts(t_grid);
  std::sort(ts.begin(), ts.end());
  for (double t : ts) {
    Matrix rt = hermitian_part(semigroup_apply(l, t, rho0, Side::schroedinger));
    DecayRow row;
    row.t = t;
    row.entropy = relative_entropy(rt, db.sigma());
    row.envelope = std::exp(-2.0 * lambda * t) * d0;
    row.slack = row.envelope - row.entropy;
    row.pass = row.slack >= -kDecayTol;
    if (row.entropy > prev + kDecayTol) tab.monotone = false;
    prev = row.entropy;
    tab.rows.push_back(row);
  }
  return tab;
}

// -Tr[L^dag rho (log rho - log sigma)]
inline double entropy_production(const DBGenerator& db, const Matrix& rho) {
  return -hs_inner(db.schroedinger(rho), log_psd(rho) - log_psd(db.sigma())).real();
}

// g_rho(L^dag rho, L^dag rho)
inline double dissipation_energy(const DBGenerator& db, const Matrix& rho) {
  Matrix v = db.schroedinger(rho);
  v = hermitian_part(v);
  v -= (v.trace() / static_cast<double>(db.dim())) * identity(db.dim());
  return metric_eval(db, rho, v);
}

// slack = -(1/2 lambda) Tr[L^dag rho (log rho - log sigma)] - D(rho || sigma)
inline CheckResult lsi_check(const DBGenerator& db, double lambda, int trials, std::uint64_t seed) {
  require(lambda > 0.0, Errc::invalid_input, "lsi_check needs lambda > 0");
  require(trials >= 1, Errc::invalid_input, "trials must be >= 1");
  CheckResult r{"lsi", lambda, trials, seed};
  r.tol = kLsiTol;
  std::mt19937_64 gen(seed);
  for (int i = 0; i < trials; ++i) {
    Matrix rho = random_density_matrix(db.dim(), true, gen);
    r.record(0.0, entropy_production(db, rho) / (2.0 * lambda) - relative_entropy(rho, db.sigma()), false);
  }
  return r;
}

// Largest lambda in [0, lambda_max] at which the sampled action-dissipation check passes.
// Empirical only; never a certificate.
inline double empirical_lambda(const DBGenerator& db, double lambda_max, int trials, std::uint64_t seed,
                               int iterations = 20) {
  require(lambda_max > 0.0, Errc::invalid_input, "lambda_max must be positive");
  if (action_dissipation_check(db, lambda_max, trials, seed).pass()) return lambda_max;
  double lo = 0.0, hi = lambda_max;
  for (int i = 0; i < iterations; ++i) {
    double mid = 0.5 * (lo + hi);
    if (action_dissipation_check(db, mid, trials, seed).pass())
      lo = mid;
    else
      hi = mid;
  }
  return lo;
}

enum class Evidence { commutator_rates, sampled_gradient_estimate, sampled_action_dissipation };

inline const char* evidence_name(Evidence e) {
  switch (e) {
    case Evidence::commutator_rates: return "commutator_rates";
    case Evidence::sampled_gradient_estimate: return "sampled_gradient_estimate";
    case Evidence::sampled_action_dissipation: return "sampled_action_dissipation";
  }
  return "?";
}

struct DecayCertificate {
  double lambda = 0.0;
  Evidence evidence = Evidence::sampled_action_dissipation;
  RatesReport rates;
  CheckResult sample;
};

// Commutator rates when they give lambda > 0, otherwise a sampled action-dissipation run at lambda.
inline DecayCertificate certify(const DBGenerator& db, double lambda, int trials, std::uint64_t seed) {
  DecayCertificate c;
  c.rates = commutator_rates(db);
  if (c.rates.certified()) {
    c.lambda = c.rates.lambda;
    c.evidence = Evidence::commutator_rates;
    c.sample = action_dissipation_check(db, c.lambda, trials, seed);
    return c;
  }
  c.lambda = lambda;
  c.sample = action_dissipation_check(db, lambda, trials, seed);
  return c;
}

// P_t A = e^{-t} A + (1 - e^{-t}) Tr[A]/n I for the depolarizing generator.
inline Matrix depolarizing_closed_form(const Matrix& a, double t) {
  const int n = static_cast<int>(a.rows());
  double e = std::exp(-t);
  return e * a + (1.0 - e) * a.trace() / static_cast<double>(n) * identity(n);
}

}  // namespace qms
