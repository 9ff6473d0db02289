#include "eivtls/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eivtls/error.hpp"

namespace eivtls::numerics {

namespace {

std::string shape(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

// Full V for rank/nullspace decisions. The SVD is taken of the wide or
// square orientation so V always has q columns.
struct RightSvd {
  Vector singular;
  Matrix v;
};

RightSvd right_svd(const Matrix& m) {
  RightSvd out;
  if (m.rows() == 0 || m.cols() == 0) {
    out.singular = Vector(0);
    out.v = Matrix::Identity(m.cols(), m.cols());
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullV);
  out.singular = svd.singularValues();
  out.v = svd.matrixV();
  return out;
}

Index rank_from_singular(const Vector& s, double rank_tol) {
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cut = rank_tol * s(0);
  Index rank = 0;
  while (rank < s.size() && s(rank) > cut) ++rank;
  return rank;
}

}  // namespace

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::NonFinite, std::string(what) + " has NaN or Inf entries");
}

double frobenius(const Matrix& m) { return m.size() == 0 ? 0.0 : m.norm(); }

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

EigenPairsAscending sym_eig_ascending(const Matrix& s) {
  if (s.rows() != s.cols()) throw Error(ErrorCode::NonSquare, "expected square matrix, got " + shape(s));
  require_finite(s, "symmetric input");
  const double scale = std::max(1.0, frobenius(s));
  if (frobenius(s - s.transpose()) > 1e-10 * scale) {
    throw Error(ErrorCode::NotSymmetric, "asymmetry exceeds 1e-10 relative");
  }
  EigenPairsAscending out;
  if (s.rows() == 0) {
    out.values = Vector(0);
    out.vectors = Matrix(0, 0);
    return out;
  }
  const Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  return out;
}

Index numerical_rank(const Matrix& m, double rank_tol) {
  require_finite(m, "rank input");
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return rank_from_singular(svd.singularValues(), rank_tol);
}

Matrix orthonormal_nullspace(const Matrix& m, double rank_tol) {
  require_finite(m, "nullspace input");
  const RightSvd svd = right_svd(m);
  const Index rank = rank_from_singular(svd.singular, rank_tol);
  return svd.v.rightCols(m.cols() - rank);
}

Matrix orthonormal_range(const Matrix& m, double rank_tol) {
  require_finite(m, "range input");
  if (m.size() == 0) return Matrix(m.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
  const Index rank = rank_from_singular(svd.singularValues(), rank_tol);
  return svd.matrixU().leftCols(rank);
}

Matrix pinv_full_row_rank(const Matrix& z_low, double rank_tol) {
  require_finite(z_low, "pseudoinverse input");
  const Index rows = z_low.rows();
  if (rows > z_low.cols()) {
    throw Error(ErrorCode::RankDeficientRows, "more rows than columns: " + shape(z_low));
  }
  if (rows == 0) return Matrix(z_low.cols(), 0);
  Eigen::JacobiSVD<Matrix> svd(z_low, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  if (!(s(rows - 1) > rank_tol * s(0))) {
    throw Error(ErrorCode::RankDeficientRows,
                "smallest singular value " + std::to_string(s(rows - 1)) + " vs largest " + std::to_string(s(0)));
  }
  // V diag(1/s) U^T; equals Z^T (Z Z^T)^{-1} without squaring the condition number.
  return svd.matrixV() * s.cwiseInverse().asDiagonal() * svd.matrixU().transpose();
}

}  // namespace eivtls::numerics
