#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qms/experiment.hpp"
#include "qms/lindblad.hpp"

using namespace qms;

namespace {

Matrix pauli_x() {
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

Matrix unit(int n, int i, int j) {
  Matrix e = Matrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

}  // namespace

TEST(Gks, HamiltonianOnly) {
  std::mt19937_64 gen(1);
  Matrix h = random_hermitian(3, gen), a = ginibre(3, 3, gen);
  Generator g = assemble_gks(std::vector<Matrix>{}, h);
  EXPECT_LE(max_abs(g.L.apply(a) - cplx(0.0, 1.0) * commutator(h, a)), 1e-12);
  EXPECT_LE(g.unitality_residual(), 1e-12);
  EXPECT_LE(g.trace_residual(), 1e-12);
}

TEST(Gks, Depolarizing) {
  for (int n = 2; n <= 4; ++n) {
    std::vector<Matrix> k;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) k.push_back(unit(n, i, j) / std::sqrt(static_cast<double>(n)));
    Generator g = assemble_gks(k, Matrix::Zero(n, n));
    EXPECT_LE(max_abs(g.L.mat - depolarizing_superop(n).mat), 1e-12);
    EXPECT_LE(max_abs(g.L.mat - depolarizing_db(n).superop().mat), 1e-12);
  }
}

TEST(Gks, Dephasing) {
  std::mt19937_64 gen(2);
  Matrix x = pauli_x(), a = ginibre(2, 2, gen);
  Generator g = assemble_gks(std::vector<Matrix>{x / std::sqrt(2.0)}, Matrix::Zero(2, 2));
  EXPECT_LE(max_abs(g.L.apply(a) - 0.5 * (x * a * x - a)), 1e-13);
}

TEST(Gks, FromSuperOperatorRejectsNonCp) {
  SuperOperator t = superop_from_map(2, 2, [](const Matrix& x) { return Matrix(x.transpose()); });
  try {
    assemble_gks(t, Matrix::Zero(2, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_cp);
  }
}

TEST(QmsGenerator, Recognition) {
  EXPECT_TRUE(is_qms_generator(depolarizing_superop(3)).qms);
  SuperOperator neg = depolarizing_superop(3) * cplx(-1.0);
  QmsReport r = is_qms_generator(neg);
  EXPECT_FALSE(r.qms);
  EXPECT_LT(r.min_reduced_eigenvalue, 0.0);
  std::mt19937_64 gen(3);
  EXPECT_TRUE(is_qms_generator(assemble_gks(std::vector<Matrix>{}, random_hermitian(3, gen)).L).qms);
}

TEST(QmsGenerator, RecoveredPartsRebuildGenerator) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::mt19937_64 gen(seed);
    int n = 2 + static_cast<int>(seed % 3);
    std::vector<Matrix> k{ginibre(n, n, gen), ginibre(n, n, gen)};
    Generator g = assemble_gks(k, random_hermitian(n, gen));
    QmsReport r = is_qms_generator(g.L);
    ASSERT_TRUE(r.qms);
    Generator back = assemble_gks(r.parts->kraus, r.parts->h);
    EXPECT_LE(max_abs(back.L.mat - g.L.mat), 1e-9 * std::max(1.0, max_abs(g.L.mat)));
  }
}

TEST(QmsGenerator, RejectsNonUnital) {
  SuperOperator s = depolarizing_superop(2) + left_mult(identity(2)) * cplx(0.1);
  try {
    is_qms_generator(s);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_unital_generator);
  }
}

TEST(DetailedBalance, GnsCheck) {
  EXPECT_TRUE(db_check_gns(depolarizing_superop(3), identity(3) / 3.0).db);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    DBGenerator db = random_db_generator(3, seed);
    DbReport r = db_check_gns(db.superop(), db.sigma());
    EXPECT_TRUE(r.db);
    EXPECT_LE(r.residual, 1e-10);
    EXPECT_LE(modular_commutation_check(db.superop(), db.sigma()), 1e-10);
  }
  // i[H, .] is anti-self-adjoint, so it fails even where it keeps sigma fixed
  Matrix h = Matrix::Zero(2, 2);
  h(0, 0) = 1.0;
  Matrix sigma = Matrix::Zero(2, 2);
  sigma(0, 0) = 0.7;
  sigma(1, 1) = 0.3;
  DbReport r = db_check_gns(assemble_gks(std::vector<Matrix>{}, h).L, sigma);
  EXPECT_FALSE(r.db);
  EXPECT_LE(r.stationarity, 1e-14);
}

TEST(Alicki, DepolarizingQubitHasThreeJumps) {
  DecomposeReport rep;
  DBGenerator db = alicki_decompose(depolarizing_superop(2), identity(2) / 2.0, &rep);
  EXPECT_EQ(db.size(), 3u);
  EXPECT_LE(rep.reconstruction, 1e-10);
  for (const auto& j : db.jumps()) {
    EXPECT_NEAR(j.omega, 0.0, 1e-12);
    EXPECT_LE(hermiticity_error(j.v), 1e-12);
  }
}

TEST(Alicki, ThermalPair) {
  DBGenerator tq = thermal_qubit_db(0.7, 1.3);
  DecomposeReport rep;
  DBGenerator back = alicki_decompose(tq.superop(), tq.sigma(), &rep);
  EXPECT_EQ(back.size(), 2u);
  EXPECT_LE(rep.reconstruction, 1e-10);
  std::vector<double> w;
  for (const auto& j : back.jumps()) w.push_back(j.omega);
  std::sort(w.begin(), w.end());
  EXPECT_NEAR(w[0], -0.7, 1e-10);
  EXPECT_NEAR(w[1], 0.7, 1e-10);
}

TEST(Alicki, RandomRoundTrip) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    int n = 2 + static_cast<int>(seed % 3);
    DBGenerator db = random_db_generator(n, seed);
    SuperOperator l = db.superop();
    DecomposeReport rep;
    DBGenerator back = alicki_decompose(l, db.sigma(), &rep);
    EXPECT_LE(rep.reconstruction, 1e-8) << "seed " << seed;
    EXPECT_LE(rep.closure, 1e-8);
    EXPECT_LE(rep.modular, 1e-8);
    for (std::size_t j = 0; j < back.size(); ++j) {
      const Jump& a = back.jumps()[j];
      const Jump& b = back.jumps()[back.partner(j)];
      EXPECT_NEAR(a.omega, -b.omega, 1e-8);
    }
    EXPECT_LE(db_check_gns(l, db.sigma()).residual, 1e-10);
    EXPECT_LE(bkm_selfadjoint_check(l, db.sigma()), 1e-8);
  }
}

TEST(Alicki, RejectsNonDetailedBalance) {
  std::mt19937_64 gen(4);
  SuperOperator l = assemble_gks(std::vector<Matrix>{}, random_hermitian(2, gen)).L;
  try {
    alicki_decompose(l, identity(2) / 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_detailed_balance);
  }
}

TEST(DbGenerator, RejectsInconsistentJumps) {
  Matrix sigma = Matrix::Zero(2, 2);
  sigma(0, 0) = 0.7;
  sigma(1, 1) = 0.3;
  // wrong Bohr frequency
  EXPECT_THROW(DBGenerator(sigma, {{unit(2, 0, 1), 0.1}, {unit(2, 1, 0), -0.1}}), Error);
  // missing adjoint partner
  double w = std::log(0.3) - std::log(0.7);
  EXPECT_THROW(DBGenerator(sigma, {{unit(2, 0, 1), w}}), Error);
  EXPECT_NO_THROW(DBGenerator(sigma, {{unit(2, 0, 1), w}, {unit(2, 1, 0), -w}}));
}

TEST(DbGenerator, SchroedingerIsAdjoint) {
  std::mt19937_64 gen(5);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    DBGenerator db = random_db_generator(3, seed);
    Matrix rho = random_density_matrix(3, true, gen);
    EXPECT_LE(max_abs(db.schroedinger(rho) - db.superop().adjoint().apply(rho)), 1e-12);
    EXPECT_LE(max_abs(db.schroedinger(db.sigma())), 1e-12);
    EXPECT_LE(max_abs(db.superop().apply(identity(3))), 1e-12);
  }
}

TEST(Ergodicity, Commutant) {
  EXPECT_EQ(ergodicity_check(depolarizing_db(3)).commutant_dim, 1);
  EXPECT_TRUE(ergodicity_check(random_db_generator(3, 9)).ergodic);
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  d(2, 2) = -0.5;
  DBGenerator diag(identity(3) / 3.0, {{d, 0.0}});
  ErgodicityReport r = ergodicity_check(diag);
  EXPECT_EQ(r.commutant_dim, 3);
  EXPECT_FALSE(r.ergodic);
}

TEST(Semigroup, DepolarizingClosedForm) {
  std::mt19937_64 gen(6);
  for (int n = 2; n <= 4; ++n) {
    SuperOperator l = depolarizing_superop(n);
    Matrix a = ginibre(n, n, gen);
    for (double t : {0.0, 0.3, 1.0, 4.0})
      EXPECT_LE(max_abs(semigroup_apply(l, t, a, Side::heisenberg) - depolarizing_closed_form(a, t)), 1e-10);
  }
}

TEST(Semigroup, LawStationarityAndPositivity) {
  std::mt19937_64 gen(7);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    DBGenerator db = random_db_generator(3, seed);
    SuperOperator l = db.superop();
    EXPECT_LE(max_abs(semigroup(l, 0.0).mat - Matrix::Identity(9, 9)), 1e-14);
    Matrix ps = semigroup(l, 0.4).mat * semigroup(l, 0.9).mat;
    EXPECT_LE(max_abs(ps - semigroup(l, 1.3).mat), 1e-10);
    EXPECT_LE(max_abs(semigroup_apply(l, 2.0, db.sigma(), Side::schroedinger) - db.sigma()), 1e-10);
    CPReport cp = is_completely_positive(semigroup(l, 0.5));
    EXPECT_TRUE(cp.cp);
    // relative entropy to sigma only decreases along the flow
    Matrix rho = random_density_matrix(3, true, gen);
    double prev = relative_entropy(rho, db.sigma());
    for (double t : {0.1, 0.2, 0.5, 1.0, 2.0}) {
      Matrix rt = hermitian_part(semigroup_apply(l, t, rho, Side::schroedinger));
      double d = relative_entropy(rt, db.sigma());
      EXPECT_LE(d, prev + 1e-12);
      prev = d;
    }
  }
  EXPECT_THROW(semigroup_apply(depolarizing_superop(2), -1.0, identity(2), Side::heisenberg), Error);
}

TEST(EigenJumps, ModularRelationAndGeneratorForm) {
  // L(A) = sum e^{-omega/2} (V*[A, V] + [V*, A] V), checked against the explicit sum
  std::mt19937_64 gen(8);
  DBGenerator db = random_db_generator(3, 11);
  Matrix a = ginibre(3, 3, gen);
  Matrix expect = Matrix::Zero(3, 3);
  for (const auto& j : db.jumps()) {
    Matrix vd = j.v.adjoint();
    expect += std::exp(-0.5 * j.omega) * (vd * commutator(a, j.v) + commutator(vd, a) * j.v);
  }
  EXPECT_LE(max_abs(db.superop().apply(a) - expect), 1e-12);
  Matrix sinv = db.sigma().inverse();
  for (const auto& j : db.jumps())
    EXPECT_LE(max_abs(db.sigma() * j.v * sinv - std::exp(-j.omega) * j.v), 1e-10);
}

TEST(Bohr, Clustering) {
  std::vector<double> c;
  std::vector<int> l = cluster_labels({0.5, -1.0, 0.5 + 1e-12, 2.0}, 1e-9, &c);
  EXPECT_EQ(c.size(), 3u);
  EXPECT_EQ(l[0], l[2]);
  EXPECT_NE(l[0], l[1]);
  EXPECT_EQ(l[1], 0);
}
