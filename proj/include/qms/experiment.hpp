#pragma once

// Batch check suites behind `qms run` and `qms certify`.
//
// Every check produces one Row: the worst slack over its trials and a pass flag. Rows marked
// as evidence are reported but do not count toward the exit code.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "qms/channels.hpp"
#include "qms/convexity.hpp"
#include "qms/entropy.hpp"
#include "qms/geodesic.hpp"
#include "qms/io.hpp"
#include "qms/lindblad.hpp"
#include "qms/monotone.hpp"
#include "qms/transport.hpp"

namespace qms {

struct Tolerances {
  std::map<std::string, double> values{
      {"dpi", 1e-9},        {"pinsker", 1e-9},   {"klein", 1e-9},       {"choi", 1e-9},
      {"convexity", 1e-9},  {"schwarz", 1e-9},   {"monotone", 1e-8},    {"alicki", 1e-8},
      {"gns", 1e-10},       {"bkm", 1e-8},       {"chain", 1e-8},       {"gradflow", 1e-8},
      {"production", 1e-5}, {"dissipation", 1e-7}, {"lsi", 1e-8},       {"decay", 1e-9},
      {"closed_form", 1e-10}, {"geodesic_self", 1e-10}, {"symmetry", 2e-3}, {"oracle", 1e-3},
      {"refine", 1e-2},     {"intertwine", 1e-9}, {"energy", 1e-7},     {"pinsker_flow", 1e-6}};
  std::map<std::string, double> overrides;

  double operator[](const std::string& k) const {
    auto it = overrides.find(k);
    if (it != overrides.end()) return it->second;
    return values.at(k);
  }
  void set(const std::string& k, double v) {
    require(values.count(k) > 0, Errc::invalid_input, "unknown tolerance \"" + k + "\"");
    require(v >= 0.0 && std::isfinite(v), Errc::invalid_input, "tolerance must be finite and >= 0");
    overrides[k] = v;
  }
};

struct ExperimentConfig {
  std::string suite = "all";
  std::optional<int> n;  // unset: each suite uses its own default range
  int trials = 200;
  std::uint64_t seed = 1;
  Tolerances tol;
  std::string output_dir = ".";
};

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> s{"entropy", "channels", "monotone", "lindblad", "transport", "convexity"};
  return s;
}

struct Row {
  std::string instance_id;
  std::string check;
  std::optional<double> lambda;
  int trials = 0;
  double worst_slack = 0.0;
  bool pass = false;
  bool asserted = true;
  double tol = 0.0;
};

class Report {
 public:
  void add(Row r) { rows_.push_back(std::move(r)); }

  // Slack rows: pass iff worst_slack >= -tol.
  void slack(const std::string& id, const std::string& check, int trials, double worst, double tol,
             std::optional<double> lambda = std::nullopt, bool asserted = true) {
    add({id, check, lambda, trials, worst, worst >= -tol, asserted, tol});
  }
  // Residual rows: slack = -residual.
  void residual(const std::string& id, const std::string& check, int trials, double worst_residual, double tol) {
    slack(id, check, trials, -worst_residual, tol);
  }

  const std::vector<Row>& rows() const { return rows_; }
  bool all_pass() const {
    for (const auto& r : rows_)
      if (r.asserted && !r.pass) return false;
    return true;
  }
  std::vector<const Row*> failures() const {
    std::vector<const Row*> f;
    for (const auto& r : rows_)
      if (r.asserted && !r.pass) f.push_back(&r);
    return f;
  }

  std::string csv() const {
    std::ostringstream os;
    os << "instance_id,check,lambda,trials,worst_slack,pass\n";
    char buf[64];
    for (const auto& r : rows_) {
      os << r.instance_id << ',' << r.check << ',';
      if (r.lambda) {
        std::snprintf(buf, sizeof buf, "%.6g", *r.lambda + 0.0);
        os << buf;
      }
      std::snprintf(buf, sizeof buf, "%.9e", r.worst_slack + 0.0);
      os << ',' << r.trials << ',' << buf << ',' << (r.pass ? "PASS" : "FAIL") << '\n';
    }
    return os.str();
  }

  json summary(const ExperimentConfig& cfg) const {
    json j;
    j["suite"] = cfg.suite;
    j["n"] = cfg.n ? json(*cfg.n) : json(nullptr);
    j["trials"] = cfg.trials;
    j["seed"] = cfg.seed;
    j["tolerances"] = cfg.tol.values;
    j["tolerance_overrides"] = cfg.tol.overrides;
    std::map<std::string, json> per;
    int asserted = 0, passed = 0;
    for (const auto& r : rows_) {
      json& s = per[r.check];
      if (s.is_null()) s = {{"rows", 0}, {"passed", 0}, {"worst_slack", r.worst_slack}};
      s["rows"] = s["rows"].get<int>() + 1;
      s["passed"] = s["passed"].get<int>() + (r.pass ? 1 : 0);
      s["worst_slack"] = std::min(s["worst_slack"].get<double>(), r.worst_slack);
      if (r.asserted) {
        ++asserted;
        passed += r.pass ? 1 : 0;
      }
    }
    j["checks"] = per;
    j["asserted_rows"] = asserted;
    j["asserted_passed"] = passed;
    json ev = json::array(), fails = json::array();
    for (const auto& r : rows_) {
      if (!r.asserted)
        ev.push_back({{"instance_id", r.instance_id}, {"check", r.check}, {"worst_slack", r.worst_slack},
                      {"pass", r.pass}});
      else if (!r.pass)
        fails.push_back({{"instance_id", r.instance_id}, {"check", r.check}, {"worst_slack", r.worst_slack}});
    }
    j["evidence_rows"] = ev;
    j["failures"] = fails;
    j["all_pass"] = all_pass();
    return j;
  }

 private:
  std::vector<Row> rows_;
};

inline std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + salt * 0xBF58476D1CE4E5B9ULL + 0x94D049BB133111EBULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline std::string tag(const std::string& suite, int lo, int hi) {
  return suite + "/n" + (lo == hi ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(hi));
}

// ---------------------------------------------------------------------------------------------
// Reusable sampled checks. Each returns the worst slack (negative residual for identities).

// Smallest Kraus count that admits a trace-preserving family M_{n_in} -> M_{n_out}.
inline int min_kraus(int n_in, int n_out) { return (n_in + n_out - 1) / n_out; }

inline double worst_pinsker(int lo, int hi, int trials, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> dim(lo, hi);
  double w = std::numeric_limits<double>::infinity();
  for (int i = 0; i < trials; ++i) {
    int n = dim(gen);
    Matrix rho = random_density_matrix(n, true, gen), sigma = random_density_matrix(n, true, gen);
    double t = trace_distance(rho, sigma);
    w = std::min(w, relative_entropy(rho, sigma) - 0.5 * t * t);
  }
  return w;
}

inline double worst_dpi(int lo, int hi, int trials, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> dim(lo, hi), nk(1, 4);
  double w = std::numeric_limits<double>::infinity();
  for (int i = 0; i < trials; ++i) {
    int n_in = dim(gen), n_out = dim(gen);
    QuantumChannel ch = random_cptp(n_in, n_out, min_kraus(n_in, n_out) + nk(gen) - 1, gen());
    Matrix rho = random_density_matrix(n_in, true, gen), sigma = random_density_matrix(n_in, true, gen);
    w = std::min(w, dpi_check(ch, rho, sigma).slack);
  }
  return w;
}

// Kraus -> characteristic matrix -> Kraus, compared as superoperators.
inline double worst_choi_roundtrip(int lo, int hi, int trials, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> dim(lo, hi), nk(1, 4);
  double w = 0.0;
  for (int i = 0; i < trials; ++i) {
    int n = dim(gen);
    QuantumChannel ch = random_cptp(n, n, nk(gen), gen());
    SuperOperator s = ch.superop();
    CPReport cp = is_completely_positive(s);
    if (!cp.cp) return std::numeric_limits<double>::infinity();
    Matrix back = Matrix::Zero(n * n, n * n);
    for (const auto& v : cp.kraus) back += sandwich(v.adjoint(), v).mat;
    w = std::max(w, max_abs(back - s.mat));
  }
  return w;
}

// Transpose on M_2: the most negative characteristic-matrix eigenvalue (expected -1/4 scaled).
inline double transpose_min_eigenvalue() {
  SuperOperator t = superop_from_map(2, 2, [](const Matrix& x) { return Matrix(x.transpose()); });
  return is_completely_positive(t).min_eigenvalue;
}

inline double worst_joint_convexity(int lo, int hi, int trials, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> dim(lo, hi);
  double w = std::numeric_limits<double>::infinity();
  for (int i = 0; i < trials; ++i) {
    int n = dim(gen);
    Matrix r1 = random_density_matrix(n, true, gen), r2 = random_density_matrix(n, true, gen);
    Matrix s1 = random_density_matrix(n, true, gen), s2 = random_density_matrix(n, true, gen);
    double lhs = 0.5 * relative_entropy(r1, s1) + 0.5 * relative_entropy(r2, s2);
    w = std::min(w, lhs - relative_entropy(0.5 * (r1 + r2), 0.5 * (s1 + s2)));
  }
  return w;
}

struct MonotoneStats {
  double worst = std::numeric_limits<double>::infinity();
  std::vector<bool> pass;
};

// One random (Phi, X, Y, K) per trial; the same instances for every theorem at fixed seed.
inline MonotoneStats monotone_stats(Theorem th, double t, int lo, int hi, int trials, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> dim(lo, hi), nk(1, 3);
  MonotoneStats s;
  for (int i = 0; i < trials; ++i) {
    int n = dim(gen), m = dim(gen);
    // enough Kraus operators that Phi^dagger keeps strictly positive inputs strictly positive
    const int k0 = std::max(min_kraus(m, n), min_kraus(n, m));
    QuantumChannel phi = random_cptp(m, n, k0 + nk(gen) - 1, gen()).adjoint();  // unital, M_n -> M_m
    Matrix x = random_density_matrix(m, true, gen), y = random_density_matrix(m, true, gen);
    Matrix k_out = ginibre(m, m, gen), k_in = ginibre(n, n, gen);
    MonotoneResult r = monotonicity_check(th, phi, x, y, th == Theorem::L1M ? k_in : k_out, t);
    s.worst = std::min(s.worst, r.slack / std::max(1.0, std::abs(r.majorant)));
    s.pass.push_back(r.pass);
  }
  return s;
}

struct AlickiStats {
  double reconstruction = 0.0, closure = 0.0, modular = 0.0, gns = 0.0, bkm = 0.0;
  int not_qms = 0;
};

inline AlickiStats alicki_stats(int lo, int hi, int trials, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> dim(lo, hi);
  AlickiStats s;
  for (int i = 0; i < trials; ++i) {
    int n = dim(gen);
    DBGenerator db = random_db_generator(n, gen());
    SuperOperator l = db.superop();
    DecomposeReport rep;
    DBGenerator back = alicki_decompose(l, db.sigma(), &rep);
    DbInvariants inv = db_invariants(back.sigma(), back.jumps());
    s.reconstruction = std::max(s.reconstruction, rep.reconstruction);
    s.closure = std::max({s.closure, rep.closure, inv.closure});
    s.modular = std::max({s.modular, rep.modular, inv.modular});
    s.gns = std::max(s.gns, db_check_gns(l, db.sigma()).residual);
    s.bkm = std::max(s.bkm, bkm_selfadjoint_check(l, db.sigma()));
    if (!is_qms_generator(l).qms) ++s.not_qms;
  }
  return s;
}

// d/dt D(P_t rho || sigma) at t = 0 by a fourth-order forward stencil. Forward only, so the
// evolved states stay positive; the step shrinks with the generator norm and the smallest
// eigenvalue of rho, which set the scale of the higher derivatives.
inline double entropy_derivative_fd(const DBGenerator& db, const Matrix& rho) {
  const int n = db.dim();
  Matrix ldag = db.superop().mat.adjoint();
  const double lmin = Eigen::SelfAdjointEigenSolver<Matrix>(hermitian_part(rho)).eigenvalues()(0);
  const double h = 0.01 * std::clamp(lmin, 1e-6, 1.0) / std::max(1.0, ldag.norm());
  Matrix step = expm(h * ldag);
  CVector v = vectorize(rho);
  double f[5];
  for (int k = 0; k < 5; ++k) {
    f[k] = relative_entropy(hermitian_part(devectorize(v, n)), db.sigma());
    v = step * v;
  }
  return (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h);
}

struct FlowStats {
  double chain = 0.0, gradflow = 0.0, production = 0.0;
};

// Chain rule, gradient-flow identity and d/dt D(P_t rho || sigma) at 0 against -g(L rho, L rho).
inline FlowStats flow_stats(int lo, int hi, int trials, std::uint64_t seed, bool with_production = true) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> dim(lo, hi);
  FlowStats s;
  for (int i = 0; i < trials; ++i) {
    int n = dim(gen);
    DBGenerator db = random_db_generator(n, gen());
    Matrix rho = random_density_matrix(n, true, gen);
    s.chain = std::max(s.chain, chain_rule_residual(db, rho));
    s.gradflow = std::max(s.gradflow, gradflow_residual(db, rho));
    if (with_production) {
      s.production = std::max(s.production, std::abs(entropy_derivative_fd(db, rho) + dissipation_energy(db, rho)));
    }
  }
  return s;
}

// Two diagonal qubit states with populations (a, 1-a) and (b, 1-b).
inline std::pair<Matrix, Matrix> diagonal_qubit_pair(double a, double b) {
  Matrix r0 = Matrix::Zero(2, 2), r1 = Matrix::Zero(2, 2);
  r0(0, 0) = a;
  r0(1, 1) = 1.0 - a;
  r1(0, 0) = b;
  r1(1, 1) = 1.0 - b;
  return {r0, r1};
}

// Thermal qubit: sigma ~ diag(1, e^{-beta}), jumps sqrt(gamma) e_01 and its adjoint.
inline DBGenerator thermal_qubit_db(double beta, double gamma = 1.0) {
  Matrix sigma = Matrix::Zero(2, 2);
  sigma(0, 0) = 1.0 / (1.0 + std::exp(-beta));
  sigma(1, 1) = 1.0 - sigma(0, 0);
  Matrix v = Matrix::Zero(2, 2);
  v(0, 1) = std::sqrt(gamma);
  // sigma v sigma^-1 = e^{beta} v, so omega = -beta
  return DBGenerator(sigma, {{v, -beta}, {v.adjoint(), beta}});
}

// ---------------------------------------------------------------------------------------------
// Suites

inline void suite_entropy(const ExperimentConfig& c, Report& rep) {
  const int lo = c.n.value_or(2), hi = c.n.value_or(6);
  const std::string id = tag("entropy", lo, hi);
  const auto& t = c.tol;
  rep.slack(id, "pinsker", c.trials, worst_pinsker(lo, hi, c.trials, sub_seed(c.seed, 11)), t["pinsker"]);

  std::mt19937_64 gen(sub_seed(c.seed, 12));
  std::uniform_int_distribution<int> dim(lo, hi);
  double klein = std::numeric_limits<double>::infinity(), bs = klein, dinv = 0.0;
  for (int i = 0; i < c.trials; ++i) {
    int n = dim(gen);
    Matrix rho = random_density_matrix(n, true, gen), sigma = random_density_matrix(n, true, gen);
    double d = relative_entropy(rho, sigma);
    klein = std::min(klein, d);
    bs = std::min(bs, bs_relative_entropy(rho, sigma) - d);
    Matrix a = random_hermitian(n, gen);
    dinv = std::max(dinv, max_abs(d_rho(rho, d_rho_inverse(rho, a)) - a) / std::max(1.0, max_abs(a)));
  }
  rep.slack(id, "klein", c.trials, klein, t["klein"]);
  rep.slack(id, "bs_dominates_umegaki", c.trials, bs, t["klein"]);
  rep.residual(id, "d_rho_inverse_roundtrip", c.trials, dinv, t["chain"]);
}

inline void suite_channels(const ExperimentConfig& c, Report& rep) {
  const int lo = c.n.value_or(2), hi = c.n.value_or(6);
  const std::string id = tag("channels", lo, hi);
  const auto& t = c.tol;
  rep.slack(id, "dpi", c.trials, worst_dpi(lo, hi, c.trials, sub_seed(c.seed, 21)), t["dpi"]);
  rep.residual(id, "choi_roundtrip", c.trials, worst_choi_roundtrip(lo, std::min(hi, 4), c.trials, sub_seed(c.seed, 22)),
               t["choi"]);
  // A rejection is a negative eigenvalue beyond the CP tolerance: slack = -(lambda_min + tol).
  double me = transpose_min_eigenvalue();
  rep.add({"channels/n2/transpose", "transpose_not_cp", std::nullopt, 1, -me, me < -t["choi"], true, t["choi"]});
  rep.slack(id, "joint_convexity", c.trials, worst_joint_convexity(lo, hi, c.trials, sub_seed(c.seed, 23)),
            t["convexity"]);

  std::mt19937_64 gen(sub_seed(c.seed, 24));
  std::uniform_int_distribution<int> dim(lo, std::min(hi, 4));
  double schwarz = std::numeric_limits<double>::infinity();
  for (int i = 0; i < std::max(1, c.trials / 10); ++i) {
    int n = dim(gen);
    QuantumChannel u = random_cptp(n, n, 2, gen()).adjoint();
    schwarz = std::min(schwarz, is_schwarz_sampled(u.superop(), 10, gen()).worst_min_eigenvalue);
  }
  rep.slack(id, "schwarz_unital_cp", std::max(1, c.trials / 10) * 10, schwarz, t["schwarz"]);
}

inline void suite_monotone(const ExperimentConfig& c, Report& rep) {
  const int lo = c.n.value_or(2), hi = c.n.value_or(4);
  const auto& tl = c.tol;
  for (double tt : {0.25, 0.5, 0.75}) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "/t%.2f", tt);
    const std::string id = tag("monotone", lo, hi) + buf;
    std::uint64_t s = sub_seed(c.seed, 31 + static_cast<std::uint64_t>(tt * 100));
    MonotoneStats l1 = monotone_stats(Theorem::L1M, tt, lo, hi, c.trials, s);
    MonotoneStats l2 = monotone_stats(Theorem::L2M, tt, lo, hi, c.trials, s);
    rep.slack(id, "L1M", c.trials, l1.worst, tl["monotone"]);
    rep.slack(id, "L2M", c.trials, l2.worst, tl["monotone"]);
    int disagree = 0;
    for (std::size_t i = 0; i < l1.pass.size(); ++i) disagree += l1.pass[i] != l2.pass[i];
    rep.add({id, "L1M_L2M_agreement", std::nullopt, c.trials, -static_cast<double>(disagree), disagree == 0, true, 0.0});
  }
  MonotoneStats l3 = monotone_stats(Theorem::L3M, 0.5, lo, hi, c.trials, sub_seed(c.seed, 39));
  rep.slack(tag("monotone", lo, hi), "L3M", c.trials, l3.worst, tl["monotone"]);
}

inline void suite_lindblad(const ExperimentConfig& c, Report& rep) {
  const int lo = c.n.value_or(2), hi = c.n.value_or(4);
  const std::string id = tag("lindblad", lo, hi);
  const auto& t = c.tol;
  AlickiStats s = alicki_stats(lo, hi, c.trials, sub_seed(c.seed, 41));
  rep.residual(id, "alicki_reconstruction", c.trials, s.reconstruction, t["alicki"]);
  rep.residual(id, "alicki_closure", c.trials, s.closure, t["alicki"]);
  rep.residual(id, "alicki_modular", c.trials, s.modular, t["alicki"]);
  rep.residual(id, "gns_selfadjoint", c.trials, s.gns, t["gns"]);
  rep.residual(id, "bkm_selfadjoint", c.trials, s.bkm, t["bkm"]);
  rep.add({id, "qms_generator", std::nullopt, c.trials, -static_cast<double>(s.not_qms), s.not_qms == 0, true, 0.0});
}

inline void suite_transport(const ExperimentConfig& c, Report& rep) {
  const int lo = c.n.value_or(2), hi = c.n.value_or(4);
  const std::string id = tag("transport", lo, hi);
  const auto& t = c.tol;
  FlowStats f = flow_stats(lo, hi, c.trials, sub_seed(c.seed, 51));
  rep.residual(id, "chain_rule", c.trials, f.chain, t["chain"]);
  rep.residual(id, "gradient_flow", c.trials, f.gradflow, t["gradflow"]);
  rep.residual(id, "entropy_production_fd", c.trials, f.production, t["production"]);

  // Geodesics on a single instance each; sizes stay small for runtime.
  const int gn = c.n.value_or(3);
  DBGenerator db = random_db_generator(gn, sub_seed(c.seed, 52));
  std::mt19937_64 gen(sub_seed(c.seed, 53));
  Matrix a = random_density_matrix(gn, true, gen), b = random_density_matrix(gn, true, gen);
  const std::string gid = "transport/n" + std::to_string(gn) + "/geodesic";
  GeodesicPath self = geodesic_distance(db, a, a);
  rep.residual(gid, "geodesic_self_action", 1, self.action, t["geodesic_self"]);
  GeodesicPath ab = geodesic_distance(db, a, b), ba = geodesic_distance(db, b, a);
  rep.residual(gid, "geodesic_symmetry", 2, std::abs(ab.distance - ba.distance) / std::max(ab.distance, 1e-300),
               t["symmetry"]);

  // Depolarizing qubit between commuting states against the scalar oracle.
  auto [r0, r1] = diagonal_qubit_pair(0.2, 0.8);
  DBGenerator dep = depolarizing_db(2);
  GeodesicOptions o16, o32;
  o16.m = 16;
  o32.m = 32;
  GeodesicPath p16 = geodesic_distance(dep, r0, r1, o16), p32 = geodesic_distance(dep, r0, r1, o32);
  const int quad = 400;
  double oracle = 0.0;
  for (int i = 0; i < quad; ++i) {
    double p = 0.2 + 0.6 * (i + 0.5) / quad;
    oracle += std::sqrt(2.0 / log_mean(p, 1.0 - p)) * 0.6 / quad;
  }
  rep.residual("transport/n2/depolarizing_geodesic", "geodesic_scalar_oracle", 1,
               std::abs(p32.distance - oracle) / oracle, t["oracle"]);
  rep.residual("transport/n2/depolarizing_geodesic", "geodesic_refinement", 2,
               std::abs(p32.distance - p16.distance) / p32.distance, t["refine"]);
}

inline void suite_convexity(const ExperimentConfig& c, Report& rep) {
  const auto& t = c.tol;
  std::vector<int> dims;
  if (c.n)
    dims = {*c.n};
  else
    dims = {2, 3, 4};
  const std::vector<double> grid{0.1, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0};
  for (int n : dims) {
    const std::string id = "convexity/n" + std::to_string(n) + "/depolarizing";
    DBGenerator db = depolarizing_db(n);
    SuperOperator l = db.superop();
    Matrix tau = db.sigma();
    std::mt19937_64 gen(sub_seed(c.seed, 61 + n));

    double closed = 0.0, ident = 0.0;
    for (int i = 0; i < c.trials; ++i) {
      Matrix a = ginibre(n, n, gen);
      double tt = grid[static_cast<std::size_t>(i) % grid.size()];
      closed = std::max(closed, max_abs(semigroup_apply(l, tt, a, Side::heisenberg) - depolarizing_closed_form(a, tt)));
      Matrix rho = random_density_matrix(n, true, gen);
      double prod = entropy_production(db, rho);
      ident = std::max(ident, std::abs(prod - relative_entropy(rho, tau) - relative_entropy(tau, rho)));
    }
    rep.residual(id, "semigroup_closed_form", c.trials, closed, t["closed_form"]);
    rep.residual(id, "production_identity", c.trials, ident, t["closed_form"]);

    CheckResult ge = gradient_estimate_check(db, 0.5, c.trials, sub_seed(c.seed, 71 + n));
    CheckResult adi = action_dissipation_check(db, 0.5, c.trials, sub_seed(c.seed, 81 + n));
    rep.slack(id, ge.check, c.trials, ge.worst_slack, t["dissipation"], 0.5);
    rep.slack(id, adi.check, c.trials, adi.worst_slack, t["dissipation"], 0.5);
    rep.add({id, "ge_adi_agreement", 0.5, c.trials, ge.pass() == adi.pass() ? 0.0 : -1.0, ge.pass() == adi.pass(), true, 0.0});

    // Above 1/2 the sampled checks are recorded as evidence only.
    CheckResult ge6 = gradient_estimate_check(db, 0.6, c.trials, sub_seed(c.seed, 91 + n));
    CheckResult adi6 = action_dissipation_check(db, 0.6, c.trials, sub_seed(c.seed, 101 + n));
    rep.slack(id, ge6.check, c.trials, ge6.worst_slack, t["dissipation"], 0.6, false);
    rep.slack(id, adi6.check, c.trials, adi6.worst_slack, t["dissipation"], 0.6, false);
    rep.add({id, "ge_adi_agreement", 0.6, c.trials, ge6.pass() == adi6.pass() ? 0.0 : -1.0, ge6.pass() == adi6.pass(),
             true, 0.0});

    double decay = std::numeric_limits<double>::infinity();
    bool monotone = true;
    for (int i = 0; i < std::max(1, c.trials / 20); ++i) {
      DecayTable tab = decay_check(db, 0.5, random_density_matrix(n, true, gen), grid);
      monotone = monotone && tab.monotone;
      for (const auto& r : tab.rows) decay = std::min(decay, r.slack);
    }
    rep.slack(id, "entropy_decay", std::max(1, c.trials / 20), monotone ? decay : -1.0, t["decay"], 0.5);
    double energy = std::numeric_limits<double>::infinity(), pin = energy;
    for (int i = 0; i < std::max(1, c.trials / 20); ++i) {
      Matrix rho = random_density_matrix(n, true, gen);
      const double e0 = dissipation_energy(db, rho), d0 = relative_entropy(rho, tau);
      for (double tt : grid) {
        Matrix rt = hermitian_part(semigroup_apply(l, tt, rho, Side::schroedinger));
        energy = std::min(energy, std::exp(-tt) * e0 - dissipation_energy(db, rt));
        pin = std::min(pin, std::sqrt(2.0 * std::exp(-tt) * d0) - trace_distance(rt, tau));
      }
    }
    rep.slack(id, "energy_decay", std::max(1, c.trials / 20), energy, t["energy"], 0.5);
    rep.slack(id, "pinsker_along_flow", std::max(1, c.trials / 20), pin, t["pinsker_flow"], 0.5);
    CheckResult lsi = lsi_check(db, 0.5, c.trials, sub_seed(c.seed, 111 + n));
    rep.slack(id, "lsi", c.trials, lsi.worst_slack, t["lsi"], 0.5);
    RatesReport rates = commutator_rates(db);
    rep.add({id, "commutator_rates_zero", rates.lambda, static_cast<int>(db.size()),
             rates.uniform ? -std::abs(rates.lambda) : -1.0, rates.uniform && std::abs(rates.lambda) <= 1e-12, true, 1e-12});
  }

  // Random GNS-DB generators at lambda = 0 and the intertwining relations.
  const int lo = c.n.value_or(2), hi = c.n.value_or(3);
  const std::string rid = tag("convexity", lo, hi) + "/random_db";
  std::mt19937_64 gen(sub_seed(c.seed, 121));
  std::uniform_int_distribution<int> dim(lo, hi);
  const int inst = std::max(1, c.trials / 20);
  double ge0 = std::numeric_limits<double>::infinity(), adi0 = ge0, inter = 0.0;
  int disagree = 0;
  double rates_max = 0.0;
  for (int i = 0; i < inst; ++i) {
    DBGenerator db = random_db_generator(dim(gen), gen());
    for (const auto& r : commutator_rates(db).rates) rates_max = std::max(rates_max, std::abs(r.a));
    CheckResult g = gradient_estimate_check(db, 0.0, 20, gen());
    CheckResult a = action_dissipation_check(db, 0.0, 20, gen());
    ge0 = std::min(ge0, g.worst_slack);
    adi0 = std::min(adi0, a.worst_slack);
    disagree += g.pass() != a.pass();
    Matrix q3 = intertwiner(db, 0.3), q7 = intertwiner(db, 0.7), q10 = intertwiner(db, 1.0);
    inter = std::max(inter, max_abs(q3 * q7 - q10));
    Matrix y = random_hermitian(db.dim(), gen);
    CVector lhs = stack(gradient(db, semigroup_apply(db.superop(), 0.3, y, Side::heisenberg)));
    inter = std::max(inter, (lhs - q3 * stack(gradient(db, y))).cwiseAbs().maxCoeff());
  }
  rep.slack(rid, "gradient_estimate", inst * 20, ge0, t["dissipation"], 0.0);
  rep.slack(rid, "action_dissipation", inst * 20, adi0, t["dissipation"], 0.0);
  rep.add({rid, "ge_adi_agreement", 0.0, inst, -static_cast<double>(disagree), disagree == 0, true, 0.0});
  rep.residual(rid, "intertwining", inst, inter, t["intertwine"]);

  rep.add({rid, "commutator_rates_zero", 0.0, inst, -rates_max, rates_max <= 1e-10, true, 1e-10});

  // Thermal qubit: the commutator fit leaves a residual, so the rates do not certify anything.
  DBGenerator tq = thermal_qubit_db(0.7);
  RatesReport rr = commutator_rates(tq);
  double tres = 0.0;
  for (const auto& r : rr.rates) tres = std::max(tres, r.residual);
  rep.add({"convexity/n2/thermal_qubit", "commutator_rates", rr.lambda, static_cast<int>(tq.size()), -tres,
           rr.certified(), false, 0.0});
}

inline void validate(const ExperimentConfig& c) {
  require(c.trials >= 1, Errc::invalid_input, "trials must be >= 1");
  if (c.n) require(*c.n >= 2 && *c.n <= 8, Errc::invalid_input, "n must lie in [2, 8]");
  bool known = c.suite == "all";
  for (const auto& s : suite_names()) known = known || c.suite == s;
  require(known, Errc::invalid_input, "unknown suite \"" + c.suite + "\"");
}

inline Report run_suites(const ExperimentConfig& c) {
  validate(c);
  Report rep;
  auto want = [&](const char* s) { return c.suite == "all" || c.suite == s; };
  if (want("entropy")) suite_entropy(c, rep);
  if (want("channels")) suite_channels(c, rep);
  if (want("monotone")) suite_monotone(c, rep);
  if (want("lindblad")) suite_lindblad(c, rep);
  if (want("transport")) suite_transport(c, rep);
  if (want("convexity")) suite_convexity(c, rep);
  return rep;
}

inline void write_report(const Report& rep, const ExperimentConfig& c) {
  write_text_file(c.output_dir + "/report.csv", rep.csv());
  write_json_file(c.output_dir + "/summary.json", rep.summary(c));
}

}  // namespace qms
