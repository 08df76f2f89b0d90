#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qms/convexity.hpp"
#include "qms/experiment.hpp"

using namespace qms;

namespace {

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

}  // namespace

TEST(Intertwiner, DepolarizingScalesByExpMinusT) {
  DBGenerator db = depolarizing_db(2);
  Matrix q0 = intertwiner(db, 0.0);
  // Q_0 is the orthogonal projection onto the range of grad
  EXPECT_LE(max_abs(q0 * q0 - q0), 1e-10);
  EXPECT_LE(max_abs(q0 * gradient_op(db) - gradient_op(db)), 1e-10);
  for (double t : {0.2, 1.0, 2.5}) EXPECT_LE(max_abs(intertwiner(db, t) - std::exp(-t) * q0), 1e-10);
  EXPECT_THROW(intertwiner(db, -0.1), Error);
}

TEST(Intertwiner, SemigroupLawAndIntertwining) {
  std::mt19937_64 gen(1);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    DBGenerator db = random_db_generator(2 + static_cast<int>(seed % 2), seed);
    Matrix qa = intertwiner(db, 0.3), qb = intertwiner(db, 0.5), qab = intertwiner(db, 0.8);
    EXPECT_LE(max_abs(qa * qb - qab), 1e-9);
    Matrix y = ginibre(db.dim(), db.dim(), gen);
    CVector lhs = stack(gradient(db, semigroup_apply(db.superop(), 0.3, y, Side::heisenberg)));
    EXPECT_LE((lhs - qa * stack(gradient(db, y))).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(CommutatorRates, DepolarizingRatesVanish) {
  RatesReport r = commutator_rates(depolarizing_db(3));
  ASSERT_EQ(r.rates.size(), 9u);
  for (const auto& c : r.rates) {
    EXPECT_NEAR(c.a, 0.0, 1e-12);
    EXPECT_LE(c.residual, 1e-12);
  }
  EXPECT_TRUE(r.uniform);
  EXPECT_FALSE(r.certified());
}

TEST(CommutatorRates, SyntheticRateRecovered) {
  // d = ad_V with V = e_01 and L = -a ad_H, H = diag(0, 1): [V, H] = V, so [d, L] = -a d
  Matrix v = Matrix::Zero(2, 2), h = diag2(0.0, 1.0);
  v(0, 1) = 1.0;
  for (double a : {0.25, 0.5, 1.7}) {
    Matrix l = -a * commutator_op(h).mat;
    RatesReport r = commutator_rates({commutator_op(v).mat}, l);
    ASSERT_EQ(r.rates.size(), 1u);
    EXPECT_NEAR(r.rates[0].a, a, 1e-9);
    EXPECT_TRUE(r.certified());
    EXPECT_NEAR(r.lambda, a, 1e-9);
  }
}

TEST(CommutatorRates, RandomDetailedBalanceNotCertified) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RatesReport r = commutator_rates(random_db_generator(3, seed));
    for (const auto& c : r.rates) EXPECT_NEAR(c.a, 0.0, 1e-10);
    EXPECT_FALSE(r.certified());
  }
  RatesReport t = commutator_rates(thermal_qubit_db(0.7));
  EXPECT_FALSE(t.uniform);
  EXPECT_FALSE(t.certified());
}

TEST(Dissipation, DepolarizingAtHalf) {
  for (int n = 2; n <= 3; ++n) {
    DBGenerator db = depolarizing_db(n);
    CheckResult ge = gradient_estimate_check(db, 0.5, 60, 3);
    CheckResult adi = action_dissipation_check(db, 0.5, 60, 4);
    EXPECT_TRUE(ge.pass()) << ge.worst_slack;
    EXPECT_TRUE(adi.pass()) << adi.worst_slack;
    EXPECT_EQ(static_cast<int>(ge.log.size()), 120);
    EXPECT_EQ(ge.trials, 60);
  }
}

TEST(Dissipation, LambdaZeroHoldsForRandomGenerators) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    DBGenerator db = random_db_generator(2 + static_cast<int>(seed % 2), seed);
    CheckResult ge = gradient_estimate_check(db, 0.0, 20, seed);
    CheckResult adi = action_dissipation_check(db, 0.0, 20, seed + 10);
    EXPECT_TRUE(ge.pass()) << ge.worst_slack;
    EXPECT_TRUE(adi.pass()) << adi.worst_slack;
  }
}

TEST(Dissipation, LargeLambdaFailsInBothForms) {
  DBGenerator db = depolarizing_db(2);
  CheckResult ge = gradient_estimate_check(db, 3.0, 20, 5);
  CheckResult adi = action_dissipation_check(db, 3.0, 20, 6);
  EXPECT_FALSE(ge.pass());
  EXPECT_FALSE(adi.pass());
  EXPECT_GT(ge.worst_t, 0.0);
}

TEST(Dissipation, EmpiricalLambdaBracketsHalf) {
  DBGenerator db = depolarizing_db(2);
  double lam = empirical_lambda(db, 4.0, 20, 7, 12);
  EXPECT_GE(lam, 0.5);
  EXPECT_LT(lam, 4.0);
  EXPECT_FALSE(action_dissipation_check(db, lam + 0.01, 20, 7).pass());
}

TEST(Certify, FallsBackToSampledEvidence) {
  DecayCertificate c = certify(depolarizing_db(2), 0.5, 20, 8);
  EXPECT_EQ(c.evidence, Evidence::sampled_action_dissipation);
  EXPECT_DOUBLE_EQ(c.lambda, 0.5);
  EXPECT_TRUE(c.sample.pass());
}

TEST(Decay, DepolarizingQubit) {
  DBGenerator db = depolarizing_db(2);
  Matrix rho = diag2(0.9, 0.1);
  std::vector<double> grid{0.0, 0.1, 0.5, 1.0, 2.0, 5.0};
  DecayTable tab = decay_check(db, 0.5, rho, grid);
  EXPECT_TRUE(tab.pass());
  EXPECT_TRUE(tab.monotone);
  EXPECT_NEAR(tab.rows.front().entropy, relative_entropy(rho, identity(2) / 2.0), 1e-14);
  // the populations relax as 1/2 + 0.4 e^{-t}
  for (const auto& r : tab.rows) {
    double p = 0.5 + 0.4 * std::exp(-r.t);
    EXPECT_NEAR(r.entropy, std::log(2.0) + p * std::log(p) + (1 - p) * std::log(1 - p), 1e-10);
  }
  DecayTable still = decay_check(db, 0.5, identity(2) / 2.0, grid);
  for (const auto& r : still.rows) EXPECT_NEAR(r.entropy, 0.0, 1e-12);
  DecayTable late = decay_check(db, 0.5, rho, {40.0});
  EXPECT_LE(late.rows[0].entropy, 1e-8);
}

TEST(Decay, TooFastEnvelopeFails) {
  DecayTable tab = decay_check(depolarizing_db(2), 5.0, diag2(0.9, 0.1), {0.5, 1.0});
  EXPECT_FALSE(tab.pass());
}

TEST(LogSobolev, DepolarizingIdentityAndCheck) {
  std::mt19937_64 gen(9);
  for (int n = 2; n <= 4; ++n) {
    DBGenerator db = depolarizing_db(n);
    Matrix tau = db.sigma();
    for (int i = 0; i < 20; ++i) {
      Matrix rho = random_density_matrix(n, true, gen);
      EXPECT_NEAR(entropy_production(db, rho), relative_entropy(rho, tau) + relative_entropy(tau, rho), 1e-10);
    }
    EXPECT_TRUE(lsi_check(db, 0.5, 50, 10 + n).pass());
  }
  EXPECT_THROW(lsi_check(depolarizing_db(2), 0.0, 5, 1), Error);
}

TEST(Flow, EnergyDecayAndPinsker) {
  std::mt19937_64 gen(11);
  for (int n = 2; n <= 3; ++n) {
    DBGenerator db = depolarizing_db(n);
    SuperOperator l = db.superop();
    for (int i = 0; i < 5; ++i) {
      Matrix rho = random_density_matrix(n, true, gen);
      const double e0 = dissipation_energy(db, rho), d0 = relative_entropy(rho, db.sigma());
      for (double t : {0.1, 0.5, 1.0, 3.0}) {
        Matrix rt = hermitian_part(semigroup_apply(l, t, rho, Side::schroedinger));
        EXPECT_LE(dissipation_energy(db, rt), std::exp(-t) * e0 + 1e-7);
        EXPECT_LE(trace_distance(rt, db.sigma()), std::sqrt(2.0 * std::exp(-t) * d0) + 1e-6);
      }
    }
  }
}
