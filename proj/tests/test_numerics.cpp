#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "eivtls/error.hpp"
#include "eivtls/numerics.hpp"
#include "test_util.hpp"

using namespace eivtls;
using eivtls::numerics::sym_eig_ascending;
using eivtls::testing::random_matrix;

namespace {

void expect_code(ErrorCode code, auto&& fn) {
  try {
    fn();
    FAIL() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

// Eigenvalues of a symmetric 3x3 as roots of its characteristic polynomial
// via the trigonometric solution of the depressed cubic.
std::array<double, 3> cubic_roots_symmetric(const Matrix& s) {
  const double q = s.trace() / 3.0;
  const double p1 = s(0, 1) * s(0, 1) + s(0, 2) * s(0, 2) + s(1, 2) * s(1, 2);
  const double p2 = std::pow(s(0, 0) - q, 2) + std::pow(s(1, 1) - q, 2) + std::pow(s(2, 2) - q, 2) + 2.0 * p1;
  const double p = std::sqrt(p2 / 6.0);
  const Matrix b = (s - q * Matrix::Identity(3, 3)) / p;
  const double r = std::clamp(b.determinant() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double hi = q + 2.0 * p * std::cos(phi);
  const double lo = q + 2.0 * p * std::cos(phi + 2.0 * std::numbers::pi / 3.0);
  return {lo, 3.0 * q - hi - lo, hi};
}

void expect_eig_invariants(const Matrix& s, const numerics::EigenPairsAscending& eig) {
  const Index n = s.rows();
  for (Index i = 0; i + 1 < n; ++i) EXPECT_LE(eig.values(i), eig.values(i + 1));
  EXPECT_LE(numerics::spectral_norm(eig.vectors.transpose() * eig.vectors - Matrix::Identity(n, n)), 1e-12);
  const double resid = (s * eig.vectors - eig.vectors * eig.values.asDiagonal()).norm();
  EXPECT_LE(resid, 1e-10 * std::max(1.0, s.norm()));
}

}  // namespace

TEST(SymEig, DiagonalCase) {
  Matrix s(2, 2);
  s << 3, 0, 0, 1;
  const auto eig = sym_eig_ascending(s);
  EXPECT_DOUBLE_EQ(eig.values(0), 1.0);
  EXPECT_DOUBLE_EQ(eig.values(1), 3.0);
  EXPECT_NEAR(std::abs(eig.vectors(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(eig.vectors(0, 1)), 1.0, 1e-15);
}

TEST(SymEig, TwoByTwoClosedForm) {
  Matrix s(2, 2);
  s << 2, 1, 1, 2;
  const auto eig = sym_eig_ascending(s);
  EXPECT_NEAR(eig.values(0), 1.0, 1e-14);
  EXPECT_NEAR(eig.values(1), 3.0, 1e-14);
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(eig.vectors.col(0).dot(Vector((Vector(2) << h, -h).finished()))), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(eig.vectors.col(1).dot(Vector((Vector(2) << h, h).finished()))), 1.0, 1e-14);
}

TEST(SymEig, MatchesCharacteristicPolynomialRoots) {
  const Matrix a = random_matrix(3, 3, 7);
  const Matrix s = a + a.transpose();
  const auto eig = sym_eig_ascending(s);
  const auto roots = cubic_roots_symmetric(s);
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(eig.values(i), roots[static_cast<std::size_t>(i)], 1e-10);
    EXPECT_NEAR((s - roots[static_cast<std::size_t>(i)] * Matrix::Identity(3, 3)).determinant(), 0.0, 1e-9);
  }
  expect_eig_invariants(s, eig);
}

TEST(SymEig, InvariantsOnRandomInputs) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Index n = 1 + static_cast<Index>(seed % 9);
    const Matrix a = random_matrix(n, n, 100 + seed) * std::pow(10.0, static_cast<double>(seed % 5) - 2.0);
    const Matrix s = a * a.transpose();
    expect_eig_invariants(s, sym_eig_ascending(s));
  }
}

TEST(SymEig, ToleratesRoundoffAsymmetry) {
  Matrix s(2, 2);
  s << 2, 1, 1 + 1e-14, 2;
  const auto eig = sym_eig_ascending(s);
  EXPECT_NEAR(eig.values(0), 1.0, 1e-13);
}

TEST(SymEig, Errors) {
  expect_code(ErrorCode::NonSquare, [] { sym_eig_ascending(Matrix::Zero(2, 3)); });
  Matrix asym(2, 2);
  asym << 1, 2, 0, 1;
  expect_code(ErrorCode::NotSymmetric, [&] { sym_eig_ascending(asym); });
  Matrix bad = Matrix::Identity(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  expect_code(ErrorCode::NonFinite, [&] { sym_eig_ascending(bad); });
}

TEST(Nullspace, Examples) {
  EXPECT_EQ(numerics::orthonormal_nullspace(Matrix::Identity(2, 2)).cols(), 0);

  Matrix m(1, 2);
  m << 1, 0;
  Matrix n = numerics::orthonormal_nullspace(m);
  ASSERT_EQ(n.cols(), 1);
  EXPECT_NEAR(std::abs(n(1, 0)), 1.0, 1e-15);
  EXPECT_NEAR(n(0, 0), 0.0, 1e-15);

  m << 1, 1;
  n = numerics::orthonormal_nullspace(m);
  ASSERT_EQ(n.cols(), 1);
  EXPECT_NEAR(std::abs(n(0, 0)), 1.0 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(n(0, 0), -n(1, 0), 1e-15);
}

TEST(Nullspace, EmptyRowsGiveIdentity) {
  const Matrix n = numerics::orthonormal_nullspace(Matrix(0, 3));
  EXPECT_TRUE(n.isApprox(Matrix::Identity(3, 3)));
}

TEST(Nullspace, RecoversConstructedRank) {
  int hits = 0;
  for (std::uint64_t trial = 0; trial < 1000; ++trial) {
    std::mt19937_64 rng(trial);
    const Index p = 1 + static_cast<Index>(rng() % 7);
    const Index q = 1 + static_cast<Index>(rng() % 7);
    const Index rho = static_cast<Index>(rng() % static_cast<std::uint64_t>(std::min(p, q) + 1));
    const Matrix m = random_matrix(p, rho, 5000 + trial) * random_matrix(rho, q, 9000 + trial);
    const Matrix n = numerics::orthonormal_nullspace(m);
    if (n.cols() == q - rho) ++hits;
    if (n.cols() > 0) {
      EXPECT_LE((n.transpose() * n - Matrix::Identity(n.cols(), n.cols())).norm(), 1e-12);
      EXPECT_LE((m * n).norm(), 1e-10 * std::max(1.0, m.norm()));
    }
  }
  EXPECT_GE(hits, 990);
}

TEST(Nullspace, RejectsNonFinite) {
  Matrix m = Matrix::Ones(1, 2);
  m(0, 1) = std::numeric_limits<double>::infinity();
  expect_code(ErrorCode::NonFinite, [&] { numerics::orthonormal_nullspace(m); });
}

TEST(Pinv, Examples) {
  Matrix z(1, 2);
  z << 1, 0;
  Matrix p = numerics::pinv_full_row_rank(z);
  EXPECT_NEAR(p(0, 0), 1.0, 1e-15);
  EXPECT_NEAR(p(1, 0), 0.0, 1e-15);

  Matrix two(1, 1);
  two << 2;
  EXPECT_NEAR(numerics::pinv_full_row_rank(two)(0, 0), 0.5, 1e-15);

  z << 1, 1;
  p = numerics::pinv_full_row_rank(z);
  EXPECT_NEAR(p(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(p(1, 0), 0.5, 1e-15);
}

TEST(Pinv, MoorePenroseIdentities) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Index rows = 1 + static_cast<Index>(seed % 4);
    const Index cols = rows + static_cast<Index>(seed % 3);
    const Matrix z = random_matrix(rows, cols, 300 + seed);
    const Matrix x = numerics::pinv_full_row_rank(z);
    EXPECT_LE((z * x * z - z).norm(), 1e-9);
    EXPECT_LE((x * z * x - x).norm(), 1e-9);
    EXPECT_LE(((z * x).transpose() - z * x).norm(), 1e-9);
    EXPECT_LE(((x * z).transpose() - x * z).norm(), 1e-9);
    EXPECT_LE((z * x - Matrix::Identity(rows, rows)).norm(), 1e-10);
  }
}

TEST(Pinv, RankDeficientRows) {
  Matrix z(2, 3);
  z << 1, 2, 3, 2, 4, 6;
  expect_code(ErrorCode::RankDeficientRows, [&] { numerics::pinv_full_row_rank(z); });
  expect_code(ErrorCode::RankDeficientRows, [] { numerics::pinv_full_row_rank(Matrix::Ones(3, 2)); });
  expect_code(ErrorCode::RankDeficientRows, [] { numerics::pinv_full_row_rank(Matrix::Zero(1, 2)); });
}
