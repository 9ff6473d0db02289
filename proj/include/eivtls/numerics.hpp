#pragma once

#include <Eigen/Dense>

namespace eivtls {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace numerics {

/// Default relative singular-value cutoff for numerical rank decisions.
inline constexpr double kRankTol = 1e-10;

/// Full spectrum of a symmetric matrix. `values` is non-decreasing and
/// column i of `vectors` is the unit eigenvector for values[i]. Signs and
/// rotations inside repeated eigenvalues are whatever the solver returns.
struct EigenPairsAscending {
  Vector values;
  Matrix vectors;
};

void require_finite(const Matrix& m, const char* what);

double frobenius(const Matrix& m);
double spectral_norm(const Matrix& m);

EigenPairsAscending sym_eig_ascending(const Matrix& s);

/// Orthonormal basis (q x d) of Nu(M). d = q - numerical rank, where the rank
/// counts singular values above rank_tol * sigma_max.
Matrix orthonormal_nullspace(const Matrix& m, double rank_tol = kRankTol);

/// Orthonormal basis of Ra(M) with the same rank rule.
Matrix orthonormal_range(const Matrix& m, double rank_tol = kRankTol);

Index numerical_rank(const Matrix& m, double rank_tol = kRankTol);

/// Moore-Penrose inverse of a wide matrix with full row rank. Throws
/// RankDeficientRows when the smallest singular value is at or below
/// rank_tol times the largest.
Matrix pinv_full_row_rank(const Matrix& z_low, double rank_tol = kRankTol);

}  // namespace numerics
}  // namespace eivtls
