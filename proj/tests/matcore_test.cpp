#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "qms/channels.hpp"
#include "qms/matcore.hpp"

using namespace qms;

namespace {

Matrix diag(std::initializer_list<double> d) {
  Matrix a = Matrix::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) {
    a(i, i) = x;
    ++i;
  }
  return a;
}

}  // namespace

TEST(Eigh, IdentityAndDiagonal) {
  Eigensystem e = eigh(identity(2));
  EXPECT_NEAR(e.values(0), 1.0, 1e-14);
  EXPECT_NEAR(e.values(1), 1.0, 1e-14);
  Eigensystem d = eigh(diag({3, 1}));
  EXPECT_NEAR(d.values(0), 1.0, 1e-14);
  EXPECT_NEAR(d.values(1), 3.0, 1e-14);
  EXPECT_NEAR(std::abs(d.vectors(1, 0)), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(d.vectors(0, 1)), 1.0, 1e-14);
}

TEST(Eigh, PauliX) {
  Matrix x(2, 2);
  x << 0, 1, 1, 0;
  Eigensystem e = eigh(x);
  // det(X - l) = l^2 - 1
  EXPECT_NEAR(e.values(0), -1.0, 1e-14);
  EXPECT_NEAR(e.values(1), 1.0, 1e-14);
}

TEST(Eigh, ReconstructionAndOrthonormality) {
  std::mt19937_64 gen(3);
  for (int n = 1; n <= 6; ++n) {
    Matrix a = random_hermitian(n, gen);
    Eigensystem e = eigh(a);
    Matrix rec = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
    EXPECT_LE((a - rec).norm(), 1e-10 * std::max(1.0, a.norm()));
    EXPECT_LE(max_abs(e.vectors.adjoint() * e.vectors - identity(n)), 1e-12);
    for (int k = 1; k < n; ++k) EXPECT_LE(e.values(k - 1), e.values(k));
  }
}

TEST(Eigh, RejectsNonFinite) {
  Matrix a = identity(2);
  a(0, 0) = std::nan("");
  try {
    eigh(a);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::invalid_input);
  }
}

TEST(HermitianMatrix, SymmetrizesAndRejects) {
  Matrix a(2, 2);
  a << 1, cplx(2, 1e-10), cplx(2, -1e-10), 3;
  HermitianMatrix h(a);
  EXPECT_LE(hermiticity_error(h.mat()), 1e-15);
  Matrix b(2, 2);
  b << 1, 2, 0, 3;
  EXPECT_THROW(HermitianMatrix{b}, Error);
}

TEST(MatrixFunction, DiagonalCases) {
  EXPECT_LE(max_abs(matrix_function(diag({4, 9}), [](double x) { return std::sqrt(x); }) - diag({2, 3})), 1e-14);
  EXPECT_LE(max_abs(log_psd(diag({std::exp(1.0), std::exp(2.0)})) - diag({1, 2})), 1e-14);
  std::mt19937_64 gen(4);
  Matrix a = random_hermitian(4, gen);
  EXPECT_LE(max_abs(matrix_function(a, [](double x) { return x; }) - a), 1e-12);
}

TEST(MatrixFunction, SingularLogThrows) {
  try {
    log_psd(diag({1, 0}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::singular_matrix);
  }
  EXPECT_THROW(power_psd(diag({1, 0}), -1.0), Error);
}

TEST(MatrixFunction, ZeroExtension) {
  Matrix l = matrix_function(diag({0.5, 0}), [](double x) { return std::log(x); }, true);
  EXPECT_NEAR(l(0, 0).real(), std::log(0.5), 1e-14);
  EXPECT_NEAR(std::abs(l(1, 1)), 0.0, 1e-14);
}

TEST(MatrixFunction, CompositionProperty) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + trial % 4;
    Matrix a = random_density_matrix(n, true, gen);
    auto g = [](double x) { return std::sqrt(x); };
    auto f = [](double x) { return std::log(1.0 + x); };
    Matrix lhs = matrix_function(a, [&](double x) { return f(g(x)); });
    Matrix rhs = matrix_function(matrix_function(a, g), f);
    EXPECT_LE(max_abs(lhs - rhs), 1e-9);
  }
}

TEST(PseudoInverse, Definitions) {
  EXPECT_LE(max_abs(pseudo_inverse(diag({2, 0})) - diag({0.5, 0})), 1e-14);
  std::mt19937_64 gen(6);
  Matrix a = random_density_matrix(3, true, gen);
  EXPECT_LE(max_abs(pseudo_inverse(a) * a - identity(3)), 1e-10);
  CVector v = ginibre(3, 1, gen).col(0).normalized();
  Matrix p = v * v.adjoint();
  EXPECT_LE(max_abs(pseudo_inverse(p) - p), 1e-12);
}

TEST(PseudoInverse, PenroseIdentities) {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + trial % 4;
    Matrix g = ginibre(n, std::max(1, n - 1), gen);
    Matrix a = g * g.adjoint();  // rank deficient PSD
    Matrix ap = pseudo_inverse(a);
    EXPECT_LE(max_abs(a * ap * a - a), 1e-9 * std::max(1.0, max_abs(a)));
    EXPECT_LE(max_abs(ap * a * ap - ap), 1e-9 * std::max(1.0, max_abs(ap)));
    Matrix aap = a * ap;
    EXPECT_LE(max_abs(aap.adjoint() - aap), 1e-9);
  }
}

TEST(Vectorization, RoundTripAndKronecker) {
  std::mt19937_64 gen(8);
  for (int n = 1; n <= 4; ++n) {
    Matrix x = ginibre(n, n, gen), a = ginibre(n, n, gen), b = ginibre(n, n, gen);
    EXPECT_EQ(devectorize(vectorize(x), n), x);
    // vec(AXB) = (B^T (x) A) vec(X)
    EXPECT_LE(max_abs(devectorize(kron(b.transpose(), a) * vectorize(x), n) - a * x * b), 1e-12);
    EXPECT_LE(max_abs(sandwich(a, b).apply(x) - a * x * b), 1e-12);
  }
  // column stacking: vec(E_{10}) has its 1 in slot 1
  Matrix e = Matrix::Zero(2, 2);
  e(1, 0) = 1.0;
  EXPECT_EQ(vectorize(e)(1), cplx(1.0));
}

TEST(SuperOperator, MatchesMapOnBasis) {
  std::mt19937_64 gen(9);
  Matrix a = ginibre(3, 3, gen);
  auto f = [&](const Matrix& x) { return Matrix(a * x + x * a.adjoint()); };
  SuperOperator s = superop_from_map(3, 3, f);
  for (const auto& e : matrix_unit_basis(3)) EXPECT_LE(max_abs(s.apply(e) - f(e)), 1e-12);
}

TEST(RandomDensity, Contract) {
  DensityMatrix one = random_density(1, false, 1);
  EXPECT_NEAR(one.mat()(0, 0).real(), 1.0, 1e-15);
  for (int n = 2; n <= 6; ++n) {
    DensityMatrix r = random_density(n, true, 10 + n);
    EXPECT_NEAR(r.mat().trace().real(), 1.0, 1e-12);
    EXPECT_GT(min_eigenvalue(r.mat()), 1e-10);
    EXPECT_TRUE(r.strict());
  }
  EXPECT_EQ(random_density(4, false, 77).mat(), random_density(4, false, 77).mat());
  EXPECT_THROW(random_density(0, false, 1), Error);
}

TEST(RandomCptp, ClosureAndDeterminism) {
  QuantumChannel u = random_cptp(3, 3, 1, 5);
  EXPECT_LE(max_abs(u.kraus()[0].adjoint() * u.kraus()[0] - identity(3)), 1e-10);
  EXPECT_LE(max_abs(u.kraus()[0] * u.kraus()[0].adjoint() - identity(3)), 1e-10);
  for (int nk = 1; nk <= 4; ++nk) EXPECT_LE(random_cptp(2, 2, nk, nk).closure_residual(), 1e-10);
  QuantumChannel a = random_cptp(2, 2, 3, 42), b = random_cptp(2, 2, 3, 42);
  for (std::size_t k = 0; k < a.kraus().size(); ++k) EXPECT_EQ(a.kraus()[k], b.kraus()[k]);
  EXPECT_THROW(random_cptp(2, 2, 0, 1), Error);
  EXPECT_THROW(random_cptp(6, 2, 2, 1), Error);
}
