#pragma once

#include <optional>
#include <vector>

#include "eivtls/model.hpp"
#include "eivtls/numerics.hpp"

namespace eivtls::solvers {

/// Relative spectral gap below which a Ritz basis is flagged degenerate.
inline constexpr double kGapDegenerateTol = 1e-8;

struct RankDecision {
  Index rank = 0;
  /// Size of the smallest-eigenvalue cluster taken as noise (n+ell-rank).
  Index cluster_size = 0;
  bool estimated = false;
  /// True when the raw cluster choice had to be clamped into k < rank <= n.
  bool clamped = false;
  /// relative_gaps[i] belongs to cluster size ell+i.
  std::vector<double> relative_gaps;
};

/// Solver input. An unset rank selects automatic rank estimation.
struct CtlsProblem {
  model::ProblemInstance instance;
  std::optional<Index> rank;
};

/// Rayleigh-Ritz state: eigenvectors of the projected Gram lifted back
/// through P. Columns of z are orthonormal and orthogonal to the exact rows.
struct RitzBasis {
  Index n = 0;
  Index ell = 0;
  Index rank = 0;
  Matrix p;
  Vector eigvals;  // all eigenvalues of G, ascending
  Matrix v;        // (n+ell-k) x (n+ell-rank)
  Matrix z;        // p * v
  Matrix z_upper;  // first n rows of z
  Matrix z_lower;  // last ell rows of z
  double spectral_gap = 0.0;
  bool gap_degenerate = false;
};

struct SolutionSet {
  Matrix x_star;        // minimal-norm estimate
  Matrix w_hat;         // n x (n-rank), orthonormal, possibly empty
  Matrix z_lower_perp;  // orthonormal basis of Nu(z_lower)
  RitzBasis basis;
  RankDecision rank_decision;

  /// X* + W_hat L.
  Matrix member(const Matrix& l) const;
};

/// Orthonormal basis of the complement of the rows of [A1 B1]. Identity
/// when k == 0. Throws RowRankDeficient when [A1 B1] has dependent rows and
/// InconsistentExactRows when [A1 B1] is independent but A1 is not (some
/// combination of the exact rows reads 0 * X = nonzero).
Matrix build_P(const Matrix& a1, const Matrix& b1);

/// G = P^T C2^T C2 P, symmetrized.
Matrix form_G(const Matrix& c2, const Matrix& p);

RitzBasis ritz_subspace(const Matrix& g, const Matrix& p, Index rank, Index ell);

/// X* = -Z_upper pinv(Z_lower). NotGeneric if Z_lower lacks full row rank.
Matrix minimal_norm_from_Z(const RitzBasis& basis);

/// W_hat = Z_upper Z_lower_perp.
Matrix nullspace_from_Z(const RitzBasis& basis);

SolutionSet solve_ctls(const CtlsProblem& problem);

/// Classical TLS through the eigenvectors of C^T C for the ell smallest
/// eigenvalues and a square inverse of their lower block.
Matrix solve_tls(const Matrix& a, const Matrix& b);

/// Rank-constrained TLS with no exact rows.
SolutionSet solve_ttls(const Matrix& a, const Matrix& b, Index rank);

/// Picks the noise cluster at the largest relative eigenvalue gap.
/// `eigvals` are the n+ell-k eigenvalues of G in ascending order and m is
/// the sample size. Throws NoGap when every relative gap is negligible.
RankDecision estimate_rank(const Vector& eigvals, Index ell, Index k, Index m);

}  // namespace eivtls::solvers
