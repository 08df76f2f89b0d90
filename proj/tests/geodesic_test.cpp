#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qms/experiment.hpp"
#include "qms/geodesic.hpp"

using namespace qms;

namespace {

GeodesicOptions with_m(int m) {
  GeodesicOptions o;
  o.m = m;
  return o;
}

}  // namespace

TEST(Geodesic, SelfDistanceIsZero) {
  std::mt19937_64 gen(1);
  DBGenerator db = random_db_generator(3, 2);
  Matrix a = random_density_matrix(3, true, gen);
  GeodesicPath p = geodesic_distance(db, a, a);
  EXPECT_LE(p.action, 1e-10);
  EXPECT_TRUE(p.converged);
}

TEST(Geodesic, ScalarOracleAndRefinement) {
  DBGenerator db = depolarizing_db(2);
  auto [r0, r1] = diagonal_qubit_pair(0.2, 0.8);
  GeodesicPath p16 = geodesic_distance(db, r0, r1, with_m(16));
  GeodesicPath p32 = geodesic_distance(db, r0, r1, with_m(32));
  const double ref = oracle::two_point_distance(0.2, 0.8, 400);
  EXPECT_LE(std::abs(p32.distance - ref) / ref, 1e-3);
  EXPECT_LE(std::abs(p32.distance - p16.distance) / p32.distance, 1e-2);
  // commuting endpoints stay on the diagonal
  for (const auto& r : p32.densities) EXPECT_LE(std::abs(r(0, 1)), 1e-8);
}

TEST(Geodesic, Symmetry) {
  std::mt19937_64 gen(3);
  DBGenerator db = random_db_generator(2, 4);
  Matrix a = random_density_matrix(2, true, gen), b = random_density_matrix(2, true, gen);
  double ab = geodesic_distance(db, a, b, with_m(16)).distance;
  double ba = geodesic_distance(db, b, a, with_m(16)).distance;
  EXPECT_LE(std::abs(ab - ba) / ab, 2e-3);
}

TEST(Geodesic, TriangleInequality) {
  std::mt19937_64 gen(5);
  DBGenerator db = random_db_generator(2, 6);
  Matrix a = random_density_matrix(2, true, gen), b = random_density_matrix(2, true, gen),
         c = random_density_matrix(2, true, gen);
  double ab = geodesic_distance(db, a, b).distance, bc = geodesic_distance(db, b, c).distance,
         ac = geodesic_distance(db, a, c).distance;
  EXPECT_LE(ac, ab + bc + 3e-3);
}

TEST(Geodesic, PathStructure) {
  std::mt19937_64 gen(7);
  DBGenerator db = random_db_generator(3, 8);
  Matrix a = random_density_matrix(3, true, gen), b = random_density_matrix(3, true, gen);
  const int m = 12;
  GeodesicPath p = geodesic_distance(db, a, b, with_m(m));
  ASSERT_EQ(p.densities.size(), static_cast<std::size_t>(m + 1));
  ASSERT_EQ(p.fluxes.size(), static_cast<std::size_t>(m));
  EXPECT_LE(max_abs(p.densities.front() - a), 1e-14);
  EXPECT_LE(max_abs(p.densities.back() - b), 1e-14);
  for (const auto& r : p.densities) {
    EXPECT_NEAR(r.trace().real(), 1.0, 1e-10);
    EXPECT_GT(min_eigenvalue(r), 0.0);
  }
  // continuity equation on each interval
  for (int k = 0; k < m; ++k) {
    Matrix v = static_cast<double>(m) * (p.densities[k + 1] - p.densities[k]);
    EXPECT_LE(max_abs(divergence(db, p.fluxes[k]) + v), 1e-8);
  }
  // the optimizer never ends above its starting path
  std::vector<Matrix> init = geodesic_initial_path(a, b, m);
  double start = 0.0;
  for (int k = 0; k < m; ++k) {
    Matrix v = static_cast<double>(m) * (init[k + 1] - init[k]);
    start += metric_eval(db, 0.5 * (init[k] + init[k + 1]), hermitian_part(v)) / m;
  }
  EXPECT_LE(p.action, start + 1e-12);
}

TEST(Geodesic, MobilityGradientFiniteDifference) {
  std::mt19937_64 gen(9);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const int n = 2 + static_cast<int>(seed % 2);
    DBGenerator db = random_db_generator(n, seed);
    Matrix rho = random_density_matrix(n, true, gen);
    rho = 0.7 * rho + 0.3 * identity(n) / static_cast<double>(n);
    Matrix b = random_hermitian(n, gen);
    Matrix dir = random_hermitian(n, gen);
    dir -= dir.trace() / static_cast<double>(n) * identity(n);
    auto q = [&](const Matrix& r) {
      VectorField gb = gradient(db, b);
      return field_inner(gb, m_rho_apply(db, r, gb)).real();
    };
    const double h = 1e-5;
    double fd = (q(rho + h * dir) - q(rho - h * dir)) / (2.0 * h);
    double an = hs_inner(mobility_gradient(db, rho, b), dir).real();
    EXPECT_NEAR(an, fd, 1e-6 * std::max(1.0, std::abs(fd)));
  }
}

TEST(Geodesic, Preconditions) {
  DBGenerator db = depolarizing_db(2);
  Matrix edge = Matrix::Zero(2, 2);
  edge(0, 0) = 1.0;
  try {
    geodesic_distance(db, edge, identity(2) / 2.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::precondition_violated);
  }
  EXPECT_THROW(geodesic_distance(db, identity(2) / 2.0, identity(3) / 3.0), Error);
  EXPECT_THROW(geodesic_distance(db, identity(2) / 2.0, identity(2) / 2.0, with_m(0)), Error);
}
